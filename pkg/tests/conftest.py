"""Shared fixtures: canonical models and a scenario-file writer.

Also prints the acceptance checklist (one line per numbered criterion) in
the terminal summary, where pytest's capture cannot swallow it.
"""

import json
import sys

import numpy as np
import pytest

from stratcomm.gausslin import SideInfoModel, SourcePairModel


def pytest_terminal_summary(terminalreporter):
    battery = sys.modules.get("test_acceptance")
    lines = getattr(battery, "CHECKLIST", None)
    if not lines:
        return
    terminalreporter.section("acceptance checklist")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def golden_model() -> SourcePairModel:
    return SourcePairModel(sigma_x2=1.0, rho=0.0, r=1.0)


@pytest.fixture
def random_models():
    """Seeded batch of valid source models away from the degenerate seams."""

    def draw(n: int, seed: int = 7) -> list[SourcePairModel]:
        rng = np.random.default_rng(seed)
        out = []
        while len(out) < n:
            rho = float(rng.uniform(-0.85, 0.85))
            r = float(rho * rho + rng.uniform(0.05, 2.5))
            if abs(r + rho) < 1e-2:
                continue
            out.append(
                SourcePairModel(
                    sigma_x2=float(rng.uniform(0.25, 4.0)), rho=rho, r=r
                )
            )
        return out

    return draw


@pytest.fixture
def si_correlated() -> SideInfoModel:
    return SideInfoModel(
        sigma_x2=1.0,
        rho_x_theta=0.2,
        r_theta=1.0,
        rho_x_w=0.4,
        rho_theta_w=-0.3,
        r_w=1.0,
    )


@pytest.fixture
def si_uncorrelated() -> SideInfoModel:
    return SideInfoModel(
        sigma_x2=1.0,
        rho_x_theta=0.3,
        r_theta=1.2,
        rho_x_w=0.0,
        rho_theta_w=0.0,
        r_w=1.0,
    )


@pytest.fixture
def write_scenario(tmp_path):
    """Serialize a scenario dict to a JSON file and return its path."""

    counter = {"n": 0}

    def write(payload: dict) -> str:
        counter["n"] += 1
        path = tmp_path / f"scenario_{counter['n']}.json"
        path.write_text(json.dumps(payload, indent=2))
        return str(path)

    return write
