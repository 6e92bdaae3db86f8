import math

import numpy as np
import pytest
from scipy.integrate import quad

from holderlab.fields import ChannelField, make_uniform_grid
from holderlab.mollify import (
    make_mollifier,
    max_discrete_divergence,
    mollification_report,
    mollify_stream,
    odd_extend,
    standard_bump_profile,
    stream_from_velocity,
    velocity_from_stream,
    write_mollification_csv,
    write_mollification_json,
)
from holderlab.weierstrass import WeierstrassParams, stream_field, velocity_field


def constant_flow(grid, speed=1.0):
    shape = (grid.nx, grid.ny)
    return ChannelField(grid, np.stack([np.full(shape, speed), np.zeros(shape)]))


def test_standard_bump_has_unit_mass():
    prof = standard_bump_profile()
    integral, _ = quad(lambda r: 2.0 * math.pi * r * prof(r), 0.0, 1.0)
    assert abs(integral - 1.0) < 1e-12
    assert prof(1.0) == 0.0
    assert prof(1.5) == 0.0
    assert prof(0.0) > prof(0.9) > 0.0


def test_make_mollifier_validation():
    with pytest.raises(ValueError, match="positive"):
        make_mollifier(0.0)
    with pytest.raises(ValueError, match="integral"):
        make_mollifier(0.1, profile=lambda r: 1.0 if r < 1.0 else 0.0)
    with pytest.raises(ValueError, match="vanish"):
        make_mollifier(0.1, profile=lambda r: 0.3)
    with pytest.raises(ValueError, match="nonnegative"):
        make_mollifier(0.1, profile=lambda r: -standard_bump_profile()(r))


def test_stream_of_constant_flow_is_zero_with_unit_flux():
    grid = make_uniform_grid(64, 65)
    psi, flux = stream_from_velocity(constant_flow(grid))
    assert np.all(psi.values == 0.0)
    assert flux == 1.0


def test_stream_of_zero_flow():
    grid = make_uniform_grid(32, 33)
    zero = ChannelField(grid, np.zeros((2, 32, 33)))
    psi, flux = stream_from_velocity(zero)
    assert np.all(psi.values == 0.0)
    assert flux == 0.0


def test_stream_recovery_matches_closed_form():
    p = WeierstrassParams(alpha=0.5, n_terms=4)
    grid = make_uniform_grid(256, 257)
    psi, flux = stream_from_velocity(velocity_field(p, grid))
    exact = stream_field(p, grid)
    assert np.max(np.abs(psi.values - exact.values)) < 5e-5
    assert abs(flux) < 1e-15


def test_stream_rejects_wall_normal_flow():
    grid = make_uniform_grid(32, 33)
    bad = ChannelField(grid, np.stack([np.zeros((32, 33)), np.ones((32, 33))]))
    with pytest.raises(ValueError, match="tangential"):
        stream_from_velocity(bad)


def test_odd_extension_of_parabola():
    grid = make_uniform_grid(16, 33)
    ys = grid.y
    psi = ChannelField(grid, np.broadcast_to(ys * (1.0 - ys), (16, 33)).copy())
    ext = odd_extend(psi, margin=0.25)
    ye = ext.y
    expect = np.where(
        ye < 0.0,
        ye * (1.0 + ye),
        np.where(ye > 1.0, (ye - 2.0) * (ye - 1.0), ye * (1.0 - ye)),
    )
    assert np.max(np.abs(ext.values[0] - expect)) == 0.0


def test_odd_extension_of_odd_mode_is_the_same_mode():
    grid = make_uniform_grid(16, 65)
    psi = ChannelField(grid, np.broadcast_to(np.sin(np.pi * grid.y), (16, 65)).copy())
    ext = odd_extend(psi, margin=0.25)
    assert np.max(np.abs(ext.values[0] - np.sin(np.pi * ext.y))) < 1e-13


def test_odd_extension_requires_wall_zeros():
    grid = make_uniform_grid(16, 33)
    psi = ChannelField(grid, np.ones((16, 33)))
    with pytest.raises(ValueError, match="wall"):
        odd_extend(psi)


def test_odd_extension_margin_validation():
    grid = make_uniform_grid(16, 33)
    psi = ChannelField(grid, np.zeros((16, 33)))
    with pytest.raises(ValueError, match="margin"):
        odd_extend(psi, margin=1e-4)
    with pytest.raises(ValueError, match="margin"):
        odd_extend(psi, margin=2.0)


def test_mollify_requires_margin_headroom():
    grid = make_uniform_grid(16, 33)
    psi = ChannelField(grid, np.zeros((16, 33)))
    ext = odd_extend(psi, margin=0.25)
    with pytest.raises(ValueError, match="margin"):
        mollify_stream(ext, make_mollifier(0.3))


def test_mollified_stream_vanishes_at_walls():
    p = WeierstrassParams(alpha=0.5, n_terms=5)
    grid = make_uniform_grid(64, 129)
    psi, _ = stream_from_velocity(velocity_field(p, grid))
    ext = odd_extend(psi)
    smooth = mollify_stream(ext, make_mollifier(0.05))
    assert np.all(smooth.values[0][:, 0] == 0.0)
    assert np.all(smooth.values[0][:, -1] == 0.0)


def test_mollify_zero_stream_is_zero():
    grid = make_uniform_grid(16, 33)
    psi = ChannelField(grid, np.zeros((16, 33)))
    out = mollify_stream(odd_extend(psi), make_mollifier(0.1))
    assert np.all(out.values == 0.0)


def test_velocity_of_zero_stream_is_uniform_flux():
    grid = make_uniform_grid(32, 33)
    psi = ChannelField(grid, np.zeros((32, 33)))
    u = velocity_from_stream(psi, 1.0)
    assert np.all(u.values[0] == 1.0)
    assert np.all(u.values[1] == 0.0)
    assert max_discrete_divergence(u) == 0.0


def test_pipeline_exactness_on_weierstrass():
    p = WeierstrassParams(alpha=0.5, n_terms=20)
    grid = make_uniform_grid(64, 129)
    u = velocity_field(p, grid)
    psi, flux = stream_from_velocity(u)
    ext = odd_extend(psi)
    for eps in (0.1, 0.05, 0.025, 0.0125):
        u_eps = velocity_from_stream(mollify_stream(ext, make_mollifier(eps)), flux)
        assert np.all(u_eps.values[1][:, 0] == 0.0)
        assert np.all(u_eps.values[1][:, -1] == 0.0)
        assert max_discrete_divergence(u_eps) <= 1e-12


def test_smooth_mode_error_is_second_order_in_epsilon():
    grid = make_uniform_grid(128, 129)
    X, Y = grid.meshgrid()
    u = ChannelField(
        grid,
        np.stack(
            [-np.sin(np.pi * X) * np.cos(np.pi * Y), np.cos(np.pi * X) * np.sin(np.pi * Y)]
        ),
    )
    eps = [0.1, 0.05, 0.025]
    rep = mollification_report(u, alpha=0.5, epsilons=eps, betas=[0.0])
    errs = rep.c_beta_errors[0.0]
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert abs(slope - 2.0) < 0.4


def test_report_on_weierstrass_sweep():
    p = WeierstrassParams(alpha=0.5, n_terms=20)
    grid = make_uniform_grid(64, 129)
    u = velocity_field(p, grid)
    rep = mollification_report(
        u, alpha=0.5, epsilons=[0.1, 0.05, 0.025, 0.0125], betas=[0.0, 0.25]
    )
    errs = rep.c_beta_errors[0.25]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    errs0 = rep.c_beta_errors[0.0]
    assert all(a > b for a, b in zip(errs0, errs0[1:]))
    assert max(rep.norm_ratios) / min(rep.norm_ratios) <= 3.0
    assert all(w == 0.0 for w in rep.wall_residuals)
    assert all(d <= 1e-12 for d in rep.max_divergences)


def test_report_of_constant_flow_is_exact():
    grid = make_uniform_grid(32, 65)
    rep = mollification_report(
        constant_flow(grid), alpha=0.5, epsilons=[0.1, 0.05, 0.025], betas=[0.0, 0.25]
    )
    for errs in rep.c_beta_errors.values():
        assert all(e == 0.0 for e in errs)
    assert all(r == 1.0 for r in rep.norm_ratios)


def test_report_needs_three_epsilons():
    grid = make_uniform_grid(32, 65)
    with pytest.raises(ValueError, match="3 epsilons"):
        mollification_report(constant_flow(grid), alpha=0.5, epsilons=[0.1, 0.05])


def test_report_serialization(tmp_path):
    grid = make_uniform_grid(32, 65)
    rep = mollification_report(
        constant_flow(grid), alpha=0.5, epsilons=[0.1, 0.05, 0.025], betas=[0.0, 0.25]
    )
    csv_path = tmp_path / "report.csv"
    write_mollification_csv(rep, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "epsilon,beta,error,ratio"
    assert len(lines) == 1 + 3 * 2
    json_path = tmp_path / "report.json"
    write_mollification_json(rep, json_path)
    import json

    payload = json.loads(json_path.read_text())
    assert payload["epsilons"] == [0.1, 0.05, 0.025]
    assert payload["max_wall_residual"] == 0.0
