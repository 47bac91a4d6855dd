"""Quick check that the extension imports and its main entry points run."""

import chainda

CONFIG = """
K = 4
volatility = 0.02
agents_per_side = 40
trials = 4
initial_mean = 10.0
"""


def main():
    names = chainda.mechanism_names()
    assert "mcafee" in names and "greedy" in names, names

    # Two-buyer, two-seller market whose every trader overlaps the others.
    market = [
        chainda.Agent(1, "buyer", 1, 4, 12.0),
        chainda.Agent(2, "buyer", 1, 4, 9.0),
        chainda.Agent(3, "seller", 1, 4, -5.0),
        chainda.Agent(4, "seller", 1, 4, -8.0),
    ]
    assert abs(chainda.offline_optimum(market) - 8.0) < 1e-9

    schedule = chainda.generate_schedule(seed=3, config=CONFIG)
    assert schedule
    offers = chainda.run_chain("mcafee", schedule, seed=3, config=CONFIG)
    assert len(offers) == len(schedule)
    paid = sum(o["payment"] for o in offers if o["payment"] is not None)
    assert paid >= -1e-9, paid

    rows = chainda.compare(["mcafee", "greedy"], seed=1, config=CONFIG)
    assert len(rows) == 8
    assert all(0.0 <= r["alloc_eff"] <= 1.0 + 1e-9 for r in rows)

    report = chainda.verify_mechanism("fixed", schedules=2, seed=1, config=CONFIG)
    assert all(passed for _, passed, _, _ in report), report

    try:
        chainda.compare(["nonsense"])
    except ValueError:
        pass
    else:
        raise AssertionError("unknown mechanism accepted")

    print("ok:", len(schedule), "agents,", len(rows), "rows")


if __name__ == "__main__":
    main()
