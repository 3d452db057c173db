"""Channel and noise covariance models for one MIMO link direction.

Spatial and temporal correlation both follow the exponential model: entry
(k, l) of the matrix is rho^(l-k) for k <= l and the Hermitian mirror below
the diagonal.  A link scenario combines transmit/receive spatial factors
with a temporal noise factor through Kronecker products, normalized to unit
trace so that the training energy budget gamma is the only scale knob.
"""

from dataclasses import dataclass, field

import numpy as np

from .tensorops import kron

# Default correlation coefficients; magnitudes and phases for the
# transmit side, receive side and the temporal noise factor.
DEFAULT_RHO_RT = 0.9 * np.exp(-1j * 0.8349 * np.pi)
DEFAULT_RHO_RR = 0.65 * np.exp(-1j * 0.4289 * np.pi)
DEFAULT_RHO_MT = 0.8 * np.exp(-1j * 0.5361 * np.pi)

_HERM_TOL = 1e-10


def exponential_covariance(n, rho):
    """n x n exponential (Kac-Murdock-Szego) covariance with ratio rho.

    Entry (k, l) is rho^(l-k) for k <= l; the matrix is Hermitian and,
    for |rho| < 1, positive definite with unit diagonal.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rho = complex(rho)
    if abs(rho) >= 1.0:
        raise ValueError(f"|rho| must be < 1, got {abs(rho)}")
    idx = np.arange(n)
    d = idx[None, :] - idx[:, None]
    # |rho|^|d| e^{j arg(rho) d} equals rho^d above the diagonal and
    # conj(rho)^{-d} below it.
    return np.abs(rho) ** np.abs(d) * np.exp(1j * np.angle(rho) * d)


@dataclass(frozen=True)
class ChannelScenario:
    """Covariance description of one link direction.

    chan_cov is the n_t*n_r covariance of the vectorized channel and
    noise_cov the b*n_r covariance of the vectorized training noise.
    Scenarios produced by :func:`build_scenario` have unit trace on both;
    directly constructed instances only need Hermitian PSD matrices of
    consistent shape.  gamma is the training energy budget ||P||_F^2.
    """

    n_t: int
    n_r: int
    b: int
    chan_cov: np.ndarray
    noise_cov: np.ndarray
    gamma: float
    rho_rt: complex = field(default=DEFAULT_RHO_RT)
    rho_rr: complex = field(default=DEFAULT_RHO_RR)
    rho_mt: complex = field(default=DEFAULT_RHO_MT)

    def __post_init__(self):
        if min(self.n_t, self.n_r, self.b) < 1:
            raise ValueError("dimensions must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        n = self.n_t * self.n_r
        m = self.b * self.n_r
        if self.chan_cov.shape != (n, n):
            raise ValueError(
                f"chan_cov shape {self.chan_cov.shape}, expected {(n, n)}"
            )
        if self.noise_cov.shape != (m, m):
            raise ValueError(
                f"noise_cov shape {self.noise_cov.shape}, expected {(m, m)}"
            )
        for name, c in (("chan_cov", self.chan_cov), ("noise_cov", self.noise_cov)):
            dev = np.abs(c - c.conj().T).max()
            if dev > _HERM_TOL * max(1.0, np.abs(c).max()):
                raise ValueError(f"{name} is not Hermitian (deviation {dev:.3e})")


def _unit_trace(c):
    return c / np.trace(c).real


def build_scenario(
    n_t,
    n_r,
    b,
    rho_rt=DEFAULT_RHO_RT,
    rho_rr=DEFAULT_RHO_RR,
    rho_mt=DEFAULT_RHO_MT,
    gamma=None,
):
    """Assemble the downlink scenario from exponential factors.

    The channel covariance is R_T^T (x) R_R and the noise covariance
    M_T^T (x) R_R with M_T the b x b temporal factor; both are normalized
    to unit trace after the Kronecker product.  gamma defaults to b * n_t.
    """
    r_t = exponential_covariance(n_t, rho_rt)
    r_r = exponential_covariance(n_r, rho_rr)
    m_t = exponential_covariance(b, rho_mt)
    if gamma is None:
        gamma = float(b * n_t)
    return ChannelScenario(
        n_t=n_t,
        n_r=n_r,
        b=b,
        chan_cov=_unit_trace(kron(r_t.T, r_r)),
        noise_cov=_unit_trace(kron(m_t.T, r_r)),
        gamma=float(gamma),
        rho_rt=complex(rho_rt),
        rho_rr=complex(rho_rr),
        rho_mt=complex(rho_mt),
    )


def _commutation(m, n):
    """Permutation K with K @ vec(A) = vec(A.T) for A of shape (m, n)."""
    k = np.zeros((m * n, m * n))
    for c in range(n):
        for r in range(m):
            k[r * n + c, c * m + r] = 1.0
    return k


def reciprocal_scenario(s):
    """Uplink scenario for a TDD-reciprocal channel.

    The uplink channel is the transpose of the downlink one, so its
    covariance is the downlink chan_cov conjugated by the vec-transpose
    permutation (eigenvalues are preserved exactly).  The uplink noise
    covariance is rebuilt from the scenario's exponential parameters at
    the swapped dimensions, and gamma defaults to b times the new
    transmit antenna count.  Applying this twice returns a scenario
    identical to the result of building the original with defaults.
    """
    k = _commutation(s.n_r, s.n_t)
    chan_ul = k @ s.chan_cov @ k.T
    m_t = exponential_covariance(s.b, s.rho_mt)
    m_r = exponential_covariance(s.n_t, s.rho_rr)
    return ChannelScenario(
        n_t=s.n_r,
        n_r=s.n_t,
        b=s.b,
        chan_cov=chan_ul,
        noise_cov=_unit_trace(kron(m_t.T, m_r)),
        gamma=float(s.b * s.n_r),
        rho_rt=s.rho_rt,
        rho_rr=s.rho_rr,
        rho_mt=s.rho_mt,
    )
