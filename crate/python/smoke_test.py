"""Smoke test for the `bargain` extension module.

Build and install it first, e.g.

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import bargain


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert "3-partial" in bargain.presets

    sol = bargain.Game.preset("3-partial").solve()
    table = {(r, c): exact for r, c, exact, _ in sol.share_table()}
    assert table[(1, "incl")] == "11/12", table
    assert table[(1, "excl")] == "13/24", table
    assert sol.first_share == "19/24"
    sol.check_structure()

    game = bargain.Game(2, "perfect", ["1/20", "1/20", "9/10"], order=["A", "B"])
    assert game.solve().first_share == "1"

    belief = bargain.Belief.independent_uniform(tau_bar=1.0, d=0.2)
    opt = belief.optimize()
    assert close(opt["offer"][0], 0.6, 1e-3), opt
    assert close(belief.accept_prob(0.5, 0.0), 0.5)
    assert bargain.Belief.antithetic().optimize()["degenerate"]

    logs, summary = bargain.simulate(bargain.Game.preset("2-perfect"), 20, seed=7)
    assert len(logs) == 20
    assert summary["first_offer_rejection_rate"] == 0.0

    model = bargain.LogitModel.column(3)
    assert close(model.accept_prob(0.5, False, 1 / 3), 0.816, 5e-4)
    logs, _ = bargain.simulate(
        bargain.Game.preset("3-perfect"), 50, seed=1, proposer="egalitarian_mwc", logit=model
    )
    assert all(log["rounds"][0]["proposer"] == 1 for log in logs)

    rows = [(0.1 * (i % 5), i % 2 == 0, 0.3, i % 3 != 0) for i in range(200)]
    fit = bargain.fit_logit(rows)
    assert fit["n_obs"] == 200

    assert close(bargain.gini([1.0, 0.0, 0.0]), 2 / 3)
    s = bargain.surface(model, 0.2628, step=0.01)
    assert s["mwc"], s

    try:
        bargain.Game.preset("4-perfect")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown preset accepted")

    ok, text = bargain.run_checklist()
    assert not ok and "partial-value" in text
    print("smoke test passed")


if __name__ == "__main__":
    main()
