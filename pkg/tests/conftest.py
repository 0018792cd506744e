import pytest
from hypothesis import strategies as st

from laacoex import RateParams, Scheme, SchemeConfig

TABLE1_BASE = dict(lambda_w=5.0, mu_lu=25.0, mu_w=40.0, mu_s=1.0, mu_on=0.1, mu_off=0.1)
TABLE1_LAMBDAS = (25.0, 37.0, 50.0, 62.5, 120.0)

# criterion lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def table1_rates(lambda_l: float) -> RateParams:
    return RateParams(lambda_l=lambda_l, **TABLE1_BASE)


def all_configs(q_values=range(1, 6)):
    """Every (scheme, Q, q_theta) combination with a valid threshold."""
    out = []
    for scheme in Scheme:
        for Q in q_values:
            if scheme.buffered:
                out += [SchemeConfig(scheme, Q=Q, q_theta=qt) for qt in range(1, Q)]
            else:
                out.append(SchemeConfig(scheme, Q=Q))
    return out


positive_rate = st.floats(min_value=0.05, max_value=60.0, allow_nan=False, allow_infinity=False)

rate_params = st.builds(
    RateParams,
    lambda_l=positive_rate,
    lambda_w=positive_rate,
    mu_lu=positive_rate,
    mu_w=positive_rate,
    mu_s=positive_rate,
    mu_on=positive_rate,
    mu_off=positive_rate,
)


@st.composite
def scheme_configs(draw, max_q=5):
    scheme = draw(st.sampled_from(list(Scheme)))
    if scheme.buffered:
        Q = draw(st.integers(2, max_q))
        return SchemeConfig(scheme, Q=Q, q_theta=draw(st.integers(1, Q - 1)))
    return SchemeConfig(scheme, Q=draw(st.integers(1, max_q)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str = ""):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number} [{verdict}] {title}"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record
