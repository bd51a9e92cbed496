"""2-D scene geometry: angles, steering vectors and IRS channel matrices.

Angle convention: every array (radar and IRS) lies along the x-axis and
angles are measured from broadside (+y), i.e. ``theta = atan2(dx, dy)``.
An IRS position is the location of its first element.
"""

from dataclasses import dataclass, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class GeometryError(ValueError):
    pass


def angle_from(reference, target):
    """Broadside angle (radians) of ``target`` as seen from ``reference``.

    >>> angle_from((0, 0), (0, 1000))
    0.0
    """
    dx = float(target[0]) - float(reference[0])
    dy = float(target[1]) - float(reference[1])
    if dx == 0.0 and dy == 0.0:
        raise GeometryError(f"coincident points {tuple(reference)}")
    return float(np.arctan2(dx, dy))


def steering(n, spacing, wavelength, theta):
    """ULA response ``[exp(j 2 pi/lambda * spacing * k * sin(theta))]_{k=0..n-1}``."""
    k = np.arange(n)
    return np.exp(1j * (2 * np.pi / wavelength) * spacing * k * np.sin(theta))


@dataclass(frozen=True)
class IrsConfig:
    position: tuple
    n_elements: int = 8
    spacing: float = None  # defaults to wavelength / 2

    def __post_init__(self):
        if int(self.n_elements) < 1:
            raise ValueError("IRS needs at least one element")
        if self.spacing is not None and self.spacing <= 0:
            raise ValueError("IRS element spacing must be positive")
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))


@dataclass(frozen=True)
class SceneConfig:
    """Radar, IRS platforms and target in the plane.

    ``n_tx`` must equal ``n_rx``: the phase-shift Fisher form relies on the
    reciprocal channel ``H_ir = H_ri^T`` of a collocated array.
    ``sampling_interval`` and ``speed_of_light`` only document the round-trip
    delay; the delay is assumed aligned to the sampling grid and never enters
    a computation.
    """

    radar_position: tuple = (0.0, 0.0)
    target_position: tuple = (5000.0, 5000.0)
    wavelength: float = 0.03
    n_tx: int = 8
    n_rx: int = 8
    radar_spacing: float = None
    irs_list: tuple = ()
    noise_variance: float = 0.1
    seed: int = 0
    sampling_interval: float = 1e-6
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        object.__setattr__(self, "radar_position", tuple(float(p) for p in self.radar_position))
        object.__setattr__(self, "target_position", tuple(float(p) for p in self.target_position))
        object.__setattr__(self, "irs_list", tuple(self.irs_list))
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.n_tx != self.n_rx:
            raise ValueError("n_tx must equal n_rx (collocated, reciprocal array)")
        if self.radar_spacing is not None and self.radar_spacing <= 0:
            raise ValueError("radar_spacing must be positive")
        if not self.irs_list:
            raise ValueError("irs_list must name at least one IRS")
        points = [self.radar_position] + [irs.position for irs in self.irs_list]
        for p in points:
            if p == self.target_position:
                raise GeometryError(f"target coincides with array at {p}")

    @property
    def d(self):
        return self.wavelength / 2 if self.radar_spacing is None else self.radar_spacing

    def irs_spacing(self, m):
        s = self.irs_list[m].spacing
        return self.wavelength / 2 if s is None else s

    @property
    def n_irs(self):
        return len(self.irs_list)

    @property
    def target_range(self):
        return float(np.hypot(*np.subtract(self.target_position, self.radar_position)))

    @property
    def round_trip_delay(self):
        """tau_0 = 2 d_tr / c (metadata only)."""
        return 2 * self.target_range / self.speed_of_light

    def with_irs_count(self, m_count):
        """Scene restricted to the first ``m_count`` IRS platforms."""
        if not 1 <= m_count <= self.n_irs:
            raise ValueError(f"m_count must be in [1, {self.n_irs}]")
        return replace(self, irs_list=self.irs_list[:m_count])

    def with_noise_variance(self, sigma2):
        return replace(self, noise_variance=sigma2)


@dataclass(frozen=True)
class IrsLink:
    """Per-IRS angles, steering vectors and channel matrices."""

    theta_ri: float
    theta_ti: float
    offset: float
    spacing: float
    b_ti: np.ndarray
    b_ri: np.ndarray
    a_ri: np.ndarray
    h_ri: np.ndarray
    h_ir: np.ndarray

    @property
    def n_elements(self):
        return self.b_ti.size


@dataclass(frozen=True)
class ChannelSet:
    theta_tr: float
    a_t: np.ndarray
    a_r: np.ndarray
    links: tuple
    wavelength: float
    radar_spacing: float

    @property
    def n_irs(self):
        return len(self.links)

    @property
    def n_elements(self):
        sizes = {link.n_elements for link in self.links}
        if len(sizes) != 1:
            raise ValueError("IRS platforms have different element counts")
        return sizes.pop()

    @property
    def offsets(self):
        return np.array([link.offset for link in self.links])

    def with_doa(self, theta):
        """Channels for a target at LoS DoA ``theta``.

        The NLoS angles follow as ``theta + offset`` for each IRS while the
        radar-IRS legs stay fixed.
        """
        links = []
        for link in self.links:
            theta_ti = theta + link.offset
            b_ti = steering(link.n_elements, link.spacing, self.wavelength, theta_ti)
            links.append(replace(link, theta_ti=theta_ti, b_ti=b_ti))
        n = self.a_t.size
        a = steering(n, self.radar_spacing, self.wavelength, theta)
        return replace(self, theta_tr=theta, a_t=a, a_r=a.copy(), links=tuple(links))

    def subset(self, m_count):
        return replace(self, links=self.links[:m_count])


def build_channels(cfg):
    """Angles, steering vectors and ``H_ri``/``H_ir`` for every IRS of ``cfg``."""
    theta_tr = angle_from(cfg.radar_position, cfg.target_position)
    d = cfg.d
    a_t = steering(cfg.n_tx, d, cfg.wavelength, theta_tr)
    a_r = steering(cfg.n_rx, d, cfg.wavelength, theta_tr)
    links = []
    for m, irs in enumerate(cfg.irs_list):
        dm = cfg.irs_spacing(m)
        theta_ri = angle_from(cfg.radar_position, irs.position)
        theta_ti = angle_from(irs.position, cfg.target_position)
        b_ri = steering(irs.n_elements, dm, cfg.wavelength, theta_ri)
        a_ri = steering(cfg.n_tx, d, cfg.wavelength, theta_ri)
        h_ri = np.outer(b_ri, a_ri)
        links.append(IrsLink(
            theta_ri=theta_ri,
            theta_ti=theta_ti,
            offset=theta_ti - theta_tr,
            spacing=dm,
            b_ti=steering(irs.n_elements, dm, cfg.wavelength, theta_ti),
            b_ri=b_ri,
            a_ri=a_ri,
            h_ri=h_ri,
            h_ir=h_ri.T.copy(),
        ))
    return ChannelSet(
        theta_tr=theta_tr,
        a_t=a_t,
        a_r=a_r,
        links=tuple(links),
        wavelength=cfg.wavelength,
        radar_spacing=d,
    )


def draw_reflectivities(m_count, seed):
    """Draw ``m_count`` CN(0, 1) target reflectivities.

    Uses numpy's PCG64 bit generator (``np.random.default_rng``), seeded
    with ``[seed, 0]`` so the stream is independent of the waveform
    initialisation stream ``[seed, 1]``.
    """
    if m_count < 1:
        raise ValueError("m_count must be >= 1")
    rng = np.random.default_rng([int(seed), 0])
    # (real, imag) pairs per reflectivity, so shorter draws are prefixes of longer ones
    g = rng.standard_normal((m_count, 2))
    return (g[:, 0] + 1j * g[:, 1]) / np.sqrt(2)
