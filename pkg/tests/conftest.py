import numpy as np
import pytest

from sdprod import library, model, solver
from sdprod.solver import SolverConfig
from sdprod.suite import REDUCED_CFG


@pytest.fixture(scope="session")
def xor_game():
    return library.xor_game()


@pytest.fixture(scope="session")
def counterexample():
    return library.counterexample_program()


@pytest.fixture(scope="session")
def theta_c5():
    return library.theta_program(library.Graph.cycle(5))


@pytest.fixture(scope="session")
def gamma_1x1():
    return library.gamma2inf_program(library.SignMatrix(np.array([[1.0]])))


@pytest.fixture(scope="session")
def gamma_2x2():
    return library.gamma2inf_program(
        library.SignMatrix(np.array([[1.0, 1.0], [1.0, -1.0]]))
    )


@pytest.fixture(scope="session")
def sigma_program(xor_game):
    return library.fl_sigma_program(xor_game)


@pytest.fixture(scope="session")
def relaxed_game_program(xor_game):
    return library.fl_sigma_bar_prime_program(xor_game)


# Session-wide solve cache: several test modules look at the same optima.
@pytest.fixture(scope="session")
def solved():
    cache = {}

    def run(key, program, cfg=None):
        if key not in cache:
            cache[key] = solver.solve(program, cfg or SolverConfig())
        return cache[key]

    return run


@pytest.fixture(scope="session")
def reduced_cfg():
    return REDUCED_CFG
