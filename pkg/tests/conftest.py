import math

import pytest

from ecirbond import CoefficientFunction, ECIRModel, PricingWindow


def cir_closed_form(k: float, sigma: float, d: int, tau: float):
    """Affine pair (A, B) for constant k and sigma with P = A exp(-B r).

    Written in standard CIR form dr = (a - kappa r) ds + vol sqrt(r) dW with
    kappa = 2k, vol = 2 sigma, a = d sigma^2.
    """
    kappa, vol = 2.0 * k, 2.0 * sigma
    if vol == 0:
        B = tau if kappa == 0 else (1 - math.exp(-kappa * tau)) / kappa
        return 1.0, B
    gamma = math.sqrt(kappa * kappa + 2.0 * vol * vol)
    e = math.expm1(gamma * tau)
    den = (gamma + kappa) * e + 2.0 * gamma
    B = 2.0 * e / den
    A = (2.0 * gamma * math.exp((kappa + gamma) * tau / 2.0) / den) ** (2.0 * d * sigma * sigma / (vol * vol))
    return A, B


def constant_model(k=0.0, sigma=1.0, d=1, r0=0.5, T=1.0):
    return ECIRModel(CoefficientFunction.const(k, T), CoefficientFunction.const(sigma, T), d, r0)


@pytest.fixture
def window():
    return PricingWindow(0.8, 1.0)


@pytest.fixture
def flat_model():
    return constant_model()


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def report(label: str, ok: bool, detail: str) -> bool:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
