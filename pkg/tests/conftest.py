import numpy as np

from dgpwnn.planewave import PWExpansion, init_directions


def random_expansion(forms, width, rng, scale=0.3):
    """Random directions and coefficients on every element of ``forms.mesh``."""
    mesh = forms.mesh
    D = init_directions(mesh.dim, width, mesh.n_elements)
    D = D.with_angles(D.angles + scale * rng.standard_normal(D.angles.shape)).normalized()
    ncol = D.width * forms.columns_per_direction
    c = rng.standard_normal((mesh.n_elements, ncol)) + 1j * rng.standard_normal((mesh.n_elements, ncol))
    return forms.expansion(D, c)


def same_directions(u, coeffs):
    return PWExpansion(u.directions, coeffs, u.wavenumber, u.kind, u.mu)


# (criterion number, passed, detail) collected by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
