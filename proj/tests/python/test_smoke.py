import math

import pottspair as pp


def test_graph_shapes():
    box = pp.build_box(1)
    assert (box.n_vertices, box.n_edges, box.n_faces) == (4, 4, 2)
    assert box.topology == "genus0"
    assert box.outer_face >= 0

    prism = pp.build_prism()
    assert (prism.n_vertices, prism.n_edges, prism.n_faces) == (6, 9, 5)
    assert all(prism.degree(v) == 3 for v in range(prism.n_vertices))

    torus = pp.build_torus(2)
    assert (torus.n_vertices, torus.n_edges, torus.n_faces) == (4, 8, 4)
    assert torus.topology == "torus"

    med = pp.medial(pp.build_box(1))
    assert med.n_vertices == 4


def test_params_derived_quantities():
    p = pp.Params(2, 3, 0.4, 0.5)
    assert (p.q, p.qp, p.a, p.b) == (2, 3, 0.4, 0.5)
    assert p.Q == [-1.0, 1.0]
    assert p.Qp == [-2.0, 0.0, 2.0]
    assert math.isclose(p.x(), (1 - 0.4 - 0.5) / 0.4, rel_tol=1e-15)
    assert math.isclose(p.p_fk(), 3 / (3 + 1 / 0.4 - 1), rel_tol=1e-15)
    assert pp.default_alphabet(1) == [0.0]


def test_exact_partition_function():
    # On the 4-cycle at q = q' = 2 the admissible sum collapses to
    # 4 a^4 + 4 + 24 b^2 + 4 b^4 by direct counting.
    a, b = 0.3, 0.6
    law = pp.enumerate_sigma(pp.build_box(1), pp.Params(2, 2, a, b))
    expected = 4 * a**4 + 4 + 24 * b**2 + 4 * b**4
    assert math.isclose(law.Z, expected, rel_tol=1e-12)
    assert len(law.joint) == 36
    assert len(law.sigma) == 16
    assert math.isclose(law.sigma.total(), law.Z, rel_tol=1e-12)


def test_identity_checks_pass():
    box = pp.build_box(1)
    p = pp.Params(2, 2, 0.3, 0.4)
    reports = [
        pp.check_potts_duality(box, 2, 1.7),
        pp.check_omega_marginals(box, p),
        pp.check_conditional_laws(box, p),
        pp.check_variance_identity(box, p, box.outer_face, pp.central_face(box)),
        pp.check_six_vertex(box, p),
        pp.check_fkg_lattice(pp.omega_marginal_table(box, p)),
        pp.check_correlation_formula(box, p, [([0, 3], [1, 1])]),
        pp.check_griffiths(box, p, [([1, 0, 0, 1], [0, 1, 1, 0])]),
    ]
    for rep in reports:
        assert rep.passed, rep.to_json()
        assert rep.max_error <= 1e-10
    assert bool(reports[0]) is True
    assert "potts-duality" in reports[0].identity


def test_identity_check_reports_failure():
    # The pair-form condition is known to fail on box(2) above the a+b = 1 line.
    rep = pp.check_fkg_lattice(
        pp.omega_marginal_form_table(pp.build_box(2), pp.Params(2, 2, 0.6, 0.6))
    )
    assert not rep.passed
    assert rep.counterexample


def test_sampler_deterministic_and_consistent():
    box = pp.build_box(1)
    p = pp.Params(2, 2, 0.5, 0.5)
    cfg = pp.SamplerConfig(sweeps=4000, burn_in=500, seed=11)

    out1 = pp.sample_estimates(box, p, cfg, chains=2)
    out2 = pp.sample_estimates(box, p, cfg, chains=2)
    assert out1 == out2
    assert out1["n"] == 2 * 3500
    assert out1["dh_variance"] >= 0.0
    assert out1["sigma0_sq"]["mean"] == 1.0  # Q = {-1, 1}

    out3 = pp.sample_estimates(box, p, pp.SamplerConfig(sweeps=4000, burn_in=500, seed=12))
    assert out3 != out1

    tv = pp.validate_against_oracle(box, p, cfg)
    assert tv < 0.15
