import pytest

from microcasimir.results import ConvergenceReport, EnergyResult, Scale


def test_energy_result_value_and_dict():
    r = EnergyResult(-2.0, Scale.HBAR_C_RHO6_OVER_R7, 0.1, scale_value=0.5, regime="ret")
    assert r.value == -1.0
    assert r.value_error == pytest.approx(0.05)
    assert r.to_dict() == {"coefficient": -2.0, "scale": Scale.HBAR_C_RHO6_OVER_R7.value, "error": 0.1,
                           "regime": "ret", "converged": True}


def test_negative_error_rejected():
    with pytest.raises(ValueError):
        EnergyResult(1.0, Scale.DIMENSIONLESS, -1.0)


def test_report_csv_is_plain():
    rep = ConvergenceReport("demo")
    rep.add(0.5, -1234567.25, 1e-3, 10)
    rep.add(0.0, 1e-20, 0.0, 0)
    assert rep.to_csv() == "param,value,error,evals\n0.5,-1234567.25,0.001,10\n0.0,1e-20,0.0,0\n"
