import numpy as np
import pytest

import slungload as sl


@pytest.fixture(scope="session")
def params3():
    return sl.default_system_params(3)


@pytest.fixture(scope="session")
def gains():
    return sl.default_gains()


@pytest.fixture(scope="session")
def reference_log_run():
    """One full reference run (20 s at 1 ms), shared across tests."""
    scenario = sl.build_scenario(sl.load_config({}))
    return sl.run_simulation(scenario), scenario


def closed_form_swing(w=2.0, m_veh=0.5, m_load=0.225, length=1.0, g=9.81):
    """Zero-thrust two-body oracle: COM free fall + uniform relative rotation.

    The vehicle starts at [0, 0, L] with horizontal velocity [w, 0, 0]; the
    load starts at rest at the origin.  The rigid cable makes the relative
    motion a circle at rate w / L while the center of mass falls freely.
    Returns (vehicle_position, load_position) functions of time.
    """
    e1 = np.array([1.0, 0, 0])
    e3 = np.array([0.0, 0, 1])
    total = m_veh + m_load
    om = w / length
    xcom0 = m_veh * (length * e3) / total
    vcom0 = m_veh * (w * e1) / total

    def vehicle(t):
        r = length * (np.cos(om * t) * e3 + np.sin(om * t) * e1)
        com = xcom0 + vcom0 * t - 0.5 * g * t * t * e3
        return com + (m_load / total) * r

    def load(t):
        r = length * (np.cos(om * t) * e3 + np.sin(om * t) * e1)
        com = xcom0 + vcom0 * t - 0.5 * g * t * t * e3
        return com - (m_veh / total) * r

    return vehicle, load


@pytest.fixture
def swing_oracle():
    return closed_form_swing
