import numpy as np
import pytest

from crmatrix import LatticeSpec, TwoBandAngles, build_kgrid, two_band_field


@pytest.fixture
def two_band_spec():
    return LatticeSpec(n_cells=64, lattice_constant=1.0, n_bands=2)


def smooth_angles(seed=0, winding=1, theta0=1.1, theta_amp=0.4, phi_amp=0.3, a=1.0):
    """Seeded smooth periodic angle pair with analytic derivatives."""
    rng = np.random.default_rng(seed)
    pt, pp = rng.uniform(0, 2 * np.pi, 2)
    return TwoBandAngles(
        theta=lambda k: theta0 + theta_amp * np.cos(k * a + pt),
        phi=lambda k: winding * k * a + phi_amp * np.sin(k * a + pp),
        dtheta=lambda k: -theta_amp * a * np.sin(k * a + pt),
        dphi=lambda k: winding * a + phi_amp * a * np.cos(k * a + pp),
    )


def smooth_field(n_cells=64, seed=0, winding=1, a=1.0, **kw):
    spec = LatticeSpec(n_cells=n_cells, lattice_constant=a, n_bands=2)
    return two_band_field(smooth_angles(seed=seed, winding=winding, a=a, **kw),
                          build_kgrid(spec))
