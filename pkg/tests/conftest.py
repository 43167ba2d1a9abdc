import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from polyhom.series import LogSeries  # noqa: E402
from polyhom.tangential import TangentialPoly  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 6))
nonzero_rationals = rationals.filter(lambda x: x != 0)


@st.composite
def tangential_polys(draw, dim, max_degree=3):
    if dim == 0:
        return TangentialPoly.constant(draw(rationals), 0)
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        e = tuple(draw(st.integers(0, max_degree)) for _ in range(dim))
        if sum(e) <= max_degree:
            terms[e] = draw(rationals)
    return TangentialPoly(dim, terms)


@st.composite
def log_series(draw, dim=0, K=6, W=None, min_power=0, max_log=2, differentiable=False):
    """Random exact series with i >= min_power and no bare logs (nor after one d/dt when differentiable)."""
    W = K if W is None else W
    coeffs = {}
    for _ in range(draw(st.integers(0, 5))):
        i = draw(st.integers(min_power, K))
        room = i - 1 if differentiable else i
        j = 0 if room <= 0 else draw(st.integers(0, min(max_log, room)))
        coeffs[(i, j)] = draw(tangential_polys(dim, max(0, W - i)))
    return LogSeries(dim, K, coeffs, W)


@pytest.fixture
def configs_dir():
    return CONFIGS


ACCEPTANCE: list[str] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
