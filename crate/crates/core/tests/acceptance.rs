//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Heavy; run with `cargo test --release --test acceptance`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chainda_core::baselines::{blum, offline};
use chainda_core::chain::{self, worked, ChainConfig, Counterfactual};
use chainda_core::market::{AgentId, AgentType, Money, OfferState, RandomSource};
use chainda_core::rules::{self, participants, Context, Rule, RuleParams, RULE_NAMES};
use chainda_core::sim::{self, mechanism::blum_price, EnvConfig, Mechanism, MechanismParams, ResultRow, SimConfig, TuneSpec};
use chainda_core::verify::snt::{self, Condition, Probe, SntViolation};
use chainda_core::verify::{self, check_truthful, Deviation, SntConstruction, SntState};

struct Outcome {
    lines: Vec<String>,
    failed: usize,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let line = format!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.into());
        println!("{line}");
        self.lines.push(line);
        if !ok {
            self.failed += 1;
        }
    }
}

fn close(a: Money, b: Money) -> bool {
    (a - b).abs() <= 1e-9
}

fn goldens() -> Vec<(&'static str, bool)> {
    let mut out = Vec::new();
    let omega_src = RandomSource::new(1);

    let c = rules::clear(
        &Rule::TradeReduction,
        &Context::None,
        &participants(&[15.0, 10.0, 4.0, 3.0], 1, 1),
        &participants(&[-1.0, -1.0, -2.0, -2.0, -5.0], 101, 1),
        omega_src.omega(1),
    );
    let static_ok = c.pairs.len() == 3
        && (1..=3).all(|b| c.payment(AgentId(b)) == Some(3.0))
        && (101..=103).all(|s| c.payment(AgentId(s)) == Some(-2.0))
        && close(c.revenue(), 3.0);
    out.push(("static trade reduction", static_ok));

    let c = rules::clear(
        &Rule::TradeReduction,
        &Context::None,
        &participants(&[10.0, 8.0, 6.0], 1, 1),
        &participants(&[-4.0, -6.0, -8.0], 101, 1),
        omega_src.omega(1),
    );
    let first = c.pairs == vec![(AgentId(1), AgentId(101))]
        && c.payment(AgentId(1)) == Some(8.0)
        && c.payment(AgentId(101)) == Some(-6.0)
        && c.nt.is_empty();
    let c = rules::clear(
        &Rule::TradeReduction,
        &Context::None,
        &participants(&[8.0, 7.0, 2.0], 1, 1),
        &participants(&[-6.0, -10.0, -12.0], 101, 1),
        omega_src.omega(1),
    );
    let second = c.pairs.is_empty() && c.nt == [1, 2, 3, 101].into_iter().map(AgentId).collect();
    out.push(("order books of the no-trade example", first && second));

    let schedule = worked::naive_dynamic();
    let b1 = schedule[0];
    let b3 = schedule[2];
    let delay = check_truthful(
        &Mechanism::NaiveTrDa,
        &schedule,
        b1.id,
        &[Deviation::new(&b1, AgentType { arrival: 2, ..b1 })],
        &omega_src,
    )
    .unwrap();
    let shade = check_truthful(
        &Mechanism::NaiveTrDa,
        &schedule,
        b3.id,
        &[Deviation::new(&b3, AgentType { value: 6.0, ..b3 })],
        &omega_src,
    )
    .unwrap();
    let naive_ok = delay.len() == 1
        && close(delay[0].truthful, 5.0)
        && close(delay[0].deviated, 11.0)
        && shade.len() == 1
        && shade[0].truthful == 0.0
        && shade[0].deviated > 0.0;
    out.push(("naive dynamic manipulations", naive_ok));

    let state = |o: &chain::ChainOutcome, id: u32| {
        let x = o.offer(AgentId(id)).unwrap();
        (x.state, x.admission_price, x.payment)
    };
    let (cfg, schedule, src) = worked::posted_price();
    let o = chain::run(&cfg, &schedule, &src).unwrap();
    let mut survivors: Vec<u32> = o
        .events
        .iter()
        .filter(|e| e.period == 3)
        .filter_map(|e| match e.event {
            chain::Event::Survived { id } => Some(id.0),
            _ => None,
        })
        .collect();
    survivors.sort();
    let prices: Vec<Counterfactual> = o.prices.iter().take(3).map(|r| r.buy).collect();
    let table1 = prices == [Counterfactual::Price(8.0), Counterfactual::Price(7.0), Counterfactual::Price(6.5)]
        && state(&o, 1) == (OfferState::Matched, 7.0, Some(7.0))
        && state(&o, 2) == (OfferState::Matched, 8.0, Some(8.0))
        && state(&o, 3) == (OfferState::PricedOut, 8.0, None)
        && state(&o, 12).2 == Some(-6.5)
        && state(&o, 14).2 == Some(-6.5)
        && state(&o, 13).0 == OfferState::Expired
        && survivors == [11, 15];
    out.push(("posted-price chain trace", table1));

    let (cfg, schedule, src) = worked::mcafee();
    let o = chain::run(&cfg, &schedule, &src).unwrap();
    let p3 = (o.prices[2].buy, o.prices[2].sell);
    let mut without = schedule.clone();
    without.retain(|a| a.id != AgentId(1));
    let o2 = chain::run(&cfg, &without, &src).unwrap();
    let table2 = state(&o, 1).2 == Some(7.0)
        && state(&o, 2).2 == Some(8.0)
        && state(&o, 11).2 == Some(-4.0)
        && state(&o, 12).2 == Some(-4.0)
        && p3 == (Counterfactual::Price(5.0), Counterfactual::Price(-3.0))
        && o2.prices[2].buy == Counterfactual::Price(6.0);
    out.push(("mcafee chain trace", table2));
    out
}

fn chain_mechanisms(k: u32, mean: Money) -> Vec<(String, ChainConfig)> {
    RULE_NAMES
        .iter()
        .map(|n| match Mechanism::from_name(n, &MechanismParams::default(), k, mean).unwrap() {
            Mechanism::Chain(cfg) => (n.to_string(), cfg),
            _ => unreachable!("rule names build chain mechanisms"),
        })
        .collect()
}

fn snt_examples() -> bool {
    let ex2 = SntState::new(
        Rule::TradeReduction,
        Context::None,
        1,
        participants(&[3.0, 2.0, 1.0], 1, 2),
        participants(&[-4.0, -6.0, -8.0], 11, 2),
    );
    let no_trade = snt::check_snt_valid(SntConstruction::NoTrade, &ex2, AgentId(2), &[Probe::Value(8.0)]);
    let ex2_nt = no_trade == vec![SntViolation { agent: AgentId(2), condition: Condition::B, probe: Probe::Value(8.0) }];
    let ex2_valid = snt::check_state(SntConstruction::Dictatorial, &ex2).is_empty()
        && snt::check_state(SntConstruction::Quorum, &ex2).is_empty();
    let ex3 = SntState::new(Rule::Simple, Context::Price(9.0), 1, participants(&[8.0], 1, 2), participants(&[-10.0], 11, 2));
    let v = snt::check_snt_valid(SntConstruction::NoTrade, &ex3, AgentId(1), &[Probe::Value(10.0)]);
    let ex3_nt = v.len() == 1 && v[0].condition == Condition::B;
    ex2_nt && ex2_valid && ex3_nt
}

/// Exact optimum by dynamic programming over subsets of sellers.
fn brute_force_optimum(schedule: &[AgentType]) -> Money {
    let buyers: Vec<&AgentType> = schedule.iter().filter(|a| a.value > 0.0).collect();
    let sellers: Vec<&AgentType> = schedule.iter().filter(|a| a.value <= 0.0).collect();
    let gain = |b: &AgentType, s: &AgentType| {
        let overlap = b.arrival <= s.departure && s.arrival <= b.departure;
        if overlap {
            (b.value + s.value).max(0.0)
        } else {
            0.0
        }
    };
    let full = 1usize << sellers.len();
    let mut best = vec![0.0; full];
    for b in &buyers {
        let mut next = best.clone();
        for mask in 0..full {
            for (j, s) in sellers.iter().enumerate() {
                if mask & (1 << j) == 0 {
                    let m = mask | (1 << j);
                    next[m] = Money::max(next[m], best[mask] + gain(b, s));
                }
            }
        }
        best = next;
    }
    best.into_iter().fold(0.0, Money::max)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Vec<AgentType> {
    let nb = rng.random_range(0..=8);
    let ns = rng.random_range(0..=8);
    let mut v = Vec::new();
    for i in 0..nb + ns {
        let a = rng.random_range(1..=6);
        let d = a + rng.random_range(0..=3);
        let w = (rng.random_range(1.0..20.0f64) * 4.0).round() / 4.0;
        v.push(if i < nb { AgentType::buyer(i + 1, a, d, w) } else { AgentType::seller(i + 1, a, d, -w) });
    }
    v
}

/// Fixed point of `r = ln((w_max - w_min) / ((r - 1) w_min))` by Newton steps.
fn ratio_oracle(w_min: f64, w_max: f64) -> f64 {
    let g = |r: f64| r - ((w_max - w_min) / ((r - 1.0) * w_min)).ln();
    let dg = |r: f64| 1.0 + 1.0 / (r - 1.0);
    let mut r = 2.0;
    for _ in 0..100 {
        r -= g(r) / dg(r);
    }
    r
}

fn blum_cdf_oracle(w_min: f64, w_max: f64, r: f64, x: f64) -> f64 {
    if x <= r * w_min {
        0.0
    } else if x >= w_max {
        1.0
    } else {
        ((x - w_min) / ((r - 1.0) * w_min)).ln() / r
    }
}

fn by_mechanism(rows: &[ResultRow]) -> BTreeMap<String, Vec<f64>> {
    let mut m: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        m.entry(r.mechanism.clone()).or_default().push(r.alloc_eff);
    }
    m
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// `a` exceeds `b` by more than two standard errors of the paired difference.
fn paired_above(a: &[f64], b: &[f64]) -> (bool, f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (m, s) = (mean(&d), se(&d));
    (m > 2.0 * s, m, s)
}

const TREND_TRIALS: usize = 100;

struct Cell {
    name: &'static str,
    rows: BTreeMap<String, Vec<f64>>,
}

fn run_cell(name: &'static str, k: u32, volatility: f64, seed: u64) -> Cell {
    let mut cfg = SimConfig { env: EnvConfig { k, volatility, ..EnvConfig::default() }, ..SimConfig::default() };
    let spec = TuneSpec::new(cfg.env.initial_mean * 0.5, cfg.env.initial_mean * 1.5, 11);
    let tuned = sim::tune_param(&cfg, "fixed", "fixed_price", spec, 20, seed + 1000).unwrap();
    cfg.params.rule.fixed_price = tuned.best;
    let names: Vec<&str> = RULE_NAMES.iter().copied().chain(["greedy", "blum", "zip"]).collect();
    let mechs = sim::mechanisms(&cfg, &names).unwrap();
    let rows = sim::compare(&cfg.env, &mechs, TREND_TRIALS, seed).unwrap();
    let cell = Cell { name, rows: by_mechanism(&rows) };
    let summary: Vec<String> = cell.rows.iter().map(|(m, v)| format!("{m}={:.3}", mean(v))).collect();
    println!("  {name} cell (fixed price tuned to {:.2}): {}", tuned.best, summary.join(" "));
    cell
}

fn main() {
    let mut out = Outcome { lines: Vec::new(), failed: 0 };
    let t0 = Instant::now();

    // 1. Worked examples.
    let start = Instant::now();
    let results = goldens();
    let elapsed = start.elapsed().as_secs_f64();
    let bad: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    out.check(
        "1 golden examples",
        bad.is_empty() && elapsed < 1.0,
        format!("{} examples, {} wrong {bad:?}, {elapsed:.3}s", results.len(), bad.len()),
    );

    // 2. Property suites.
    let big = EnvConfig { volatility: 0.05, ..EnvConfig::default() };
    let mut ledger_fail = Vec::new();
    for (name, cfg) in chain_mechanisms(big.k, big.initial_mean) {
        let r = verify::ledger_suite(&cfg, &big, 100, 11).unwrap();
        if !r.passed() {
            ledger_fail.push(format!("{name}:{}", r.violations));
        }
    }
    out.check("2a ledgers", ledger_fail.is_empty(), format!("10 rules x 100 schedules, failing {ledger_fail:?}"));

    let small = verify::small_env(4);
    let mut truth_fail = Vec::new();
    let mut cases = 0;
    for (name, cfg) in chain_mechanisms(small.k, small.initial_mean) {
        let r = verify::truthfulness_suite(&Mechanism::Chain(cfg), &small, 200, 10, 3, 21).unwrap();
        cases += r.cases;
        println!("  {}", r.to_string().lines().next().unwrap_or_default());
        if !r.passed() {
            truth_fail.push(format!("{name}:{}", r.violations));
        }
    }
    out.check(
        "2b truthfulness",
        truth_fail.is_empty(),
        format!("200 schedules x 10 seeds, {cases} clean cases, failing {truth_fail:?}"),
    );

    let mut snt_fail = Vec::new();
    let mut pairs = 0;
    for name in RULE_NAMES {
        let rule = Rule::from_name(name, &RuleParams { fixed_price: 5.0, ..RuleParams::default() }).unwrap();
        for c in snt::valid_constructions(&rule) {
            pairs += 1;
            let r = verify::snt_suite(&rule, c, 1000, 31);
            if !r.passed() {
                snt_fail.push(format!("{name}/{}:{}", c.name(), r.violations));
            }
        }
    }
    let examples = snt_examples();
    out.check(
        "2c strong no-trade validity",
        snt_fail.is_empty() && examples,
        format!("{pairs} (rule, construction) pairs x 1000 states, worked verdicts {examples}, failing {snt_fail:?}"),
    );

    // 3. Oracles.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng);
        if !close(offline::optimum(&inst).0, brute_force_optimum(&inst)) {
            mismatches += 1;
        }
    }
    out.check("3a offline optimum", mismatches == 0, format!("1000 instances, {mismatches} mismatches"));

    let r = blum::competitive_ratio(1.0, 10.0).unwrap();
    let r_oracle = ratio_oracle(1.0, 10.0);
    out.check(
        "3b fixed point",
        (r - 2.102).abs() <= 1e-3 && (r - r_oracle).abs() <= 1e-9,
        format!("r={r:.6}, independent {r_oracle:.6}"),
    );

    let ends = [AgentType::buyer(1, 1, 1, 10.0), AgentType::seller(2, 1, 1, -1.0)];
    let mut draws: Vec<f64> =
        (0..100_000u64).map(|i| blum_price(&ends, &RandomSource::new(51).with_trial(i)).unwrap()).collect();
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = blum_cdf_oracle(1.0, 10.0, r_oracle, x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    out.check("3c randomized price distribution", ks <= 0.02, format!("Kolmogorov distance {ks:.4} over 1e5 draws"));

    // 4. Trends.
    let low = run_cell("low volatility", 10, 0.02, 61);
    let high = run_cell("high volatility", 2, 0.15, 71);
    let get = |c: &Cell, m: &str| c.rows[m].clone();

    let mc = get(&high, "mcafee");
    let (a1, m1, s1) = paired_above(&mc, &get(&high, "fixed"));
    let (a2, m2, s2) = paired_above(&mc, &get(&high, "blum"));
    out.check(
        "4a mcafee above fixed and randomized price (high volatility)",
        a1 && a2,
        format!("diff vs fixed {m1:.3} (se {s1:.3}), vs blum {m2:.3} (se {s2:.3})"),
    );

    let zl = get(&low, "zip");
    let worst = RULE_NAMES
        .iter()
        .map(|m| {
            let (ok, d, s) = paired_above(&zl, &get(&low, m));
            (ok, d, s, *m)
        })
        .min_by(|x, y| (x.1 - 2.0 * x.2).total_cmp(&(y.1 - 2.0 * y.2)))
        .unwrap();
    out.check(
        "4b zip above every chain rule (low volatility)",
        RULE_NAMES.iter().all(|m| paired_above(&zl, &get(&low, m)).0),
        format!("closest {} diff {:.3} (se {:.3})", worst.3, worst.1, worst.2),
    );
    let zh = get(&high, "zip");
    let drop = 0.5 * mean(&zl) - mean(&zh);
    let drop_se = (0.25 * se(&zl).powi(2) + se(&zh).powi(2)).sqrt();
    out.check(
        "4b zip loses over half its efficiency under high volatility",
        drop > 2.0 * drop_se,
        format!("{:.3} -> {:.3}", mean(&zl), mean(&zh)),
    );

    let mut greedy_fail = Vec::new();
    for cell in [&low, &high] {
        let g = get(cell, "greedy");
        for (m, v) in &cell.rows {
            if m != "greedy" && !paired_above(&g, v).0 {
                let (_, d, s) = paired_above(&g, v);
                greedy_fail.push(format!("{}/{m}: diff {d:.4} se {s:.4}", cell.name));
            }
        }
    }
    out.check("4c greedy above every other mechanism", greedy_fail.is_empty(), format!("failing {greedy_fail:?}"));

    let mut blum_detail = Vec::new();
    let mut blum_ok = true;
    for cell in [&low, &high] {
        let (ok, d, s) = paired_above(&get(cell, "fixed"), &get(cell, "blum"));
        blum_ok &= ok;
        blum_detail.push(format!("{}: diff {d:.3} se {s:.3}", cell.name));
    }
    out.check("4d tuned fixed price above randomized price", blum_ok, blum_detail.join(", "));

    // 5. Clearing duration.
    let mut taus = Vec::new();
    for k in [4, 6, 8, 10] {
        let cfg = SimConfig { env: EnvConfig { k, volatility: 0.02, ..EnvConfig::default() }, ..SimConfig::default() };
        let spec = TuneSpec { integer: true, ..TuneSpec::new(1.0, 16.0, 16) };
        taus.push(sim::tune_param(&cfg, "mcafee", "tau", spec, 20, 81).unwrap().best);
    }
    out.check("5 tuned clearing interval grows with patience", taus.windows(2).all(|w| w[0] <= w[1]), format!("tau for K=4,6,8,10: {taus:?}"));

    // 6. Determinism.
    let cfg = SimConfig { env: EnvConfig { volatility: 0.05, ..EnvConfig::default() }, ..SimConfig::default() };
    let mechs = sim::mechanisms(&cfg, &["mcafee", "ewma", "zip", "blum"]).unwrap();
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let rows = pool.install(|| sim::compare(&cfg.env, &mechs, 16, 91)).unwrap();
        let mut buf = Vec::new();
        sim::write_csv(&mut buf, &rows).unwrap();
        buf
    };
    let one = csv(1);
    let same = one == csv(4) && one == csv(1) && !one.is_empty();
    out.check("6 byte-identical results", same, format!("{} bytes, 1 vs 4 threads and repeated", one.len()));

    println!("{} criteria checked in {:.1}s, {} failing", out.lines.len(), t0.elapsed().as_secs_f64(), out.failed);
    if out.failed > 0 {
        std::process::exit(1);
    }
}
