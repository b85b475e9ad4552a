use std::process::ExitCode;
use std::time::{Duration, Instant};

use bafo::descending::{concave_threshold_outcome, DescEventKind, DescOrdering, DescProfile, DescVerdict, DescendingAuction};
use bafo::experiments::{self, all_orders};
use bafo::fixtures::{chop, chop_dime, concave_example, FORK};
use bafo::market::{efficient_allocation, WinnerSelector};
use bafo::nyb::{NybAuction, NybOrder, NybPolicy, NybProfile, NybVerdict};
use bafo::random::{gen_random, RandomInstanceSpec, RandomKind};
use bafo::{Instance, Money, SellerSubset, TieBreakRule, WorkBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const NYB_INSTANCES: usize = 240;
const DESC_INSTANCES: usize = 240;
const INVARIANT_INSTANCES_PER_SHAPE: usize = 40;
const WINNER_CHOICE_VALUATIONS: usize = 40;
const WINNER_CHOICE_GRID: Money = 5;
const WINNER_CHOICE_RANDOM_TRIALS: usize = 5000;
const GS_INSTANCES: usize = 160;

type Outcome = Result<String, String>;

struct Harness {
    failed: usize,
}

impl Harness {
    fn line(&mut self, id: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let (ok, detail) = match res {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, limit {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!("{} {id} [{took:.2?} / {limit:?}] {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn seeds(tag: u64, count: usize) -> impl Iterator<Item = u64> {
    (0..count as u64).map(move |k| SEED ^ (tag << 32) ^ k)
}

fn random_instance(seed: u64, max_n: usize, max_value: Money, max_cost: Money, kinds: &[RandomKind]) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let monotone = rng.gen_bool(0.5);
    gen_random(&RandomInstanceSpec { seed, n, max_value, max_cost, kind, monotone }).expect("valid random spec")
}

const ALL_KINDS: [RandomKind; 4] = [RandomKind::Explicit, RandomKind::Anonymous, RandomKind::Additive, RandomKind::UnitDemand];

fn tiebreak_for(seed: u64) -> TieBreakRule {
    if seed.is_multiple_of(2) {
        TieBreakRule::MaxCardThenLexMask
    } else {
        TieBreakRule::LexMask
    }
}

fn chopsticks() -> Outcome {
    let r = experiments::chopsticks(None).map_err(|e| e.to_string())?;
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    if !failed.is_empty() {
        return Err(format!("failed checks: {failed:?}"));
    }
    Ok(format!("bids {} cents, {} checks", r.data["bids"], r.checks.len()))
}

fn nyb_efficiency() -> Outcome {
    let mut cases = 0;
    let mut solves = 0;
    for seed in seeds(2, NYB_INSTANCES) {
        let inst = random_instance(seed, 3, 8, 6, &ALL_KINDS);
        let tb = tiebreak_for(seed);
        let efficient = efficient_allocation(&inst, &tb).map_err(|e| e.to_string())?;
        for order in all_orders(inst.n()) {
            let a = NybAuction::new(&inst, tb.clone(), NybOrder::fixed(order.clone(), inst.n()).unwrap()).unwrap();
            let bid_cap = inst.max_value().max(inst.max_cost());
            if a.bid_cap() != bid_cap {
                return Err(format!("seed {seed}: bid cap {} instead of {bid_cap}", a.bid_cap()));
            }
            let exact = a.solve_exact(WorkBudget::default()).map_err(|e| e.to_string())?;
            let canonical = a.run_canonical().map_err(|e| e.to_string())?;
            if exact.outcome.winners != efficient {
                return Err(format!("seed {seed} order {order:?}: exact {} vs efficient {efficient}", exact.outcome.winners));
            }
            if canonical.outcome.winners != exact.outcome.winners {
                return Err(format!("seed {seed} order {order:?}: canonical {} vs exact {}", canonical.outcome.winners, exact.outcome.winners));
            }
            solves += 1;
        }
        cases += 1;
    }
    Ok(format!("{cases} instances, {solves} order/instance solves, 100% efficient, exact = canonical"))
}

fn desc_instance(seed: u64, max_h: Money) -> (Instance, Money) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17));
    let h = rng.gen_range(1..=max_h);
    (random_instance(seed, 3, 8, h, &ALL_KINDS), h)
}

fn desc_efficiency() -> Outcome {
    let mut states = 0;
    for seed in seeds(3, DESC_INSTANCES) {
        let (inst, h) = desc_instance(seed, 6);
        let tb = tiebreak_for(seed);
        let a = DescendingAuction::new(&inst, tb.clone(), DescOrdering::default()).unwrap().with_h(h).unwrap();
        let eq = a.solve_exact(WorkBudget::default()).map_err(|e| e.to_string())?;
        let efficient = efficient_allocation(&inst, &tb).map_err(|e| e.to_string())?;
        if eq.outcome.winners != efficient {
            return Err(format!("seed {seed} h {h}: exact {} vs efficient {efficient}", eq.outcome.winners));
        }
        states += eq.state_count;
    }
    Ok(format!("{DESC_INSTANCES} instances (h <= 6), {states} memoized states, 100% efficient"))
}

#[derive(Default)]
struct InvariantTally {
    states: usize,
    literal_violations: usize,
    first_violation: Option<String>,
    hypothesis_states: usize,
    hypothesis_violations: usize,
    generalized_violations: usize,
}

/// Memoized-state invariant for every n <= 3, h <= 4 shape.
fn invariant_tally() -> Result<InvariantTally, String> {
    let mut t = InvariantTally::default();
    for n in 1..=3usize {
        for h in 1..=4 {
            for (k, seed) in seeds(30 + (n as u64) * 8 + h as u64, INVARIANT_INSTANCES_PER_SHAPE).enumerate() {
                let kind = ALL_KINDS[k % ALL_KINDS.len()];
                let inst = gen_random(&RandomInstanceSpec { seed, n, max_value: 8, max_cost: h, kind, monotone: k % 3 != 0 }).unwrap();
                let tb = tiebreak_for(seed);
                let a = DescendingAuction::new(&inst, tb, DescOrdering::default()).unwrap().with_h(h).unwrap();
                let eq = a.solve_exact(WorkBudget::default()).map_err(|e| e.to_string())?;
                for (s, winners) in eq.states() {
                    t.states += 1;
                    let hypothesis = (0..n).all(|i| s.is_frozen(i) || s.prices[i] >= inst.cost(i));
                    let literal = a.winners_at_prices(&a.hat_prices(s)) == winners;
                    if !literal {
                        t.literal_violations += 1;
                        t.first_violation.get_or_insert_with(|| {
                            format!("costs {:?} h {h} prices {:?} frozen {:?}: winners {winners}", inst.costs(), s.prices, s.frozen)
                        });
                    }
                    if hypothesis {
                        t.hypothesis_states += 1;
                        if !literal {
                            t.hypothesis_violations += 1;
                        }
                    }
                    if a.winners_at_prices(&a.effective_prices(s)) != winners {
                        t.generalized_violations += 1;
                    }
                }
            }
        }
    }
    Ok(t)
}

fn spe_verification() -> Outcome {
    let dime = chop_dime();
    let tb = TieBreakRule::default();
    let mut nodes = 0;
    for order in all_orders(3) {
        let a = NybAuction::new(&dime, tb.clone(), NybOrder::fixed(order.clone(), 3).unwrap()).unwrap();
        match a.verify_spe(&NybProfile::canonical(3), WorkBudget::default()).map_err(|e| e.to_string())? {
            NybVerdict::Pass { nodes_checked } => nodes += nodes_checked,
            NybVerdict::Witness(w) => return Err(format!("dime CHOP order {order:?}: witness {w:?}")),
        }
    }
    let mut states = 0;
    for seed in seeds(3, DESC_INSTANCES) {
        let (inst, h) = desc_instance(seed, 6);
        let a = DescendingAuction::new(&inst, tiebreak_for(seed), DescOrdering::default()).unwrap().with_h(h).unwrap();
        match a.verify_spe(&DescProfile::canonical(inst.n()), WorkBudget::default()).map_err(|e| e.to_string())? {
            DescVerdict::Pass { states_checked } => states += states_checked,
            DescVerdict::Witness(w) => return Err(format!("descending seed {seed}: witness {w:?}")),
        }
    }
    let cents = chop();
    let a = NybAuction::new(&cents, tb, NybOrder::fixed(vec![1, 2, 0], 3).unwrap()).unwrap();
    let profile = NybProfile::uniform(NybPolicy::Constant(95), 3);
    let witness = match a.verify_spe(&profile, WorkBudget::default()).map_err(|e| e.to_string())? {
        NybVerdict::Witness(w) => w,
        NybVerdict::Pass { .. } => return Err("95/95 profile passed".into()),
    };
    let improves = witness.utility_gain > 0 || (witness.utility_gain == 0 && witness.wins_after_deviation);
    if witness.seller != FORK || !improves {
        return Err(format!("95/95 witness is not a fork deviation: {witness:?}"));
    }
    Ok(format!(
        "dime CHOP 6 orders ({nodes} nodes) and {DESC_INSTANCES} descending instances ({states} states) pass; \
         95/95 witness: fork bids {} instead of {} after bids {:?}, gain {}, wins {}",
        witness.deviation_bid, witness.profile_bid, witness.bids, witness.utility_gain, witness.wins_after_deviation
    ))
}

fn cost_gap() -> Outcome {
    let mut parts = Vec::new();
    for (n, low, high, ratio) in [(4, 2, 4, "2"), (6, 2, 6, "3")] {
        let r = experiments::run("cost-gap", Some(n), None, None).map_err(|e| e.to_string())?;
        let got = (r.data["cost_h2"].as_i64(), r.data["cost_h1"].as_i64(), r.data["ratio"].as_str());
        if got != (Some(low), Some(high), Some(ratio)) || !r.pass {
            return Err(format!("n = {n}: got {got:?}, pass = {}", r.pass));
        }
        parts.push(format!("n = {n}: costs {low} / {high}, ratio {ratio}"));
    }
    Ok(parts.join("; "))
}

fn concave_threshold() -> Outcome {
    let inst = concave_example();
    let formula = concave_threshold_outcome(&inst).map_err(|e| e.to_string())?;
    let prices: Vec<Money> = formula.winners.iter().map(|i| formula.final_prices[i]).collect();
    let a = DescendingAuction::new(&inst, TieBreakRule::default(), DescOrdering::default()).unwrap();
    let eq = a.solve_exact(WorkBudget::default()).map_err(|e| e.to_string())?;
    let exact_prices: Vec<Money> = eq.outcome.winners.iter().map(|i| eq.outcome.final_prices[i]).collect();
    let detail = format!(
        "formula winners {} at {prices:?}; exact (h = {}) winners {} at {exact_prices:?}",
        formula.winners,
        a.h(),
        eq.outcome.winners
    );
    if formula.winners.len() != 2 || prices != [6, 6] {
        return Err(format!("formula mismatch: {detail}"));
    }
    if formula.winners != eq.outcome.winners || formula.payments != eq.outcome.payments {
        return Err(format!("exact outcome differs: {detail}"));
    }
    Ok(detail)
}

/// Raises losers' and lowers winners' prices; the chosen set must not move.
fn winner_choice_trial(sel: &WinnerSelector, p: &[Money], q: &[Money]) -> bool {
    sel.select(q) == sel.select(p)
}

fn perturbations(p: &[Money], w: SellerSubset, grid: Money) -> Vec<Vec<Money>> {
    let mut out = vec![Vec::with_capacity(p.len())];
    for (i, &pi) in p.iter().enumerate() {
        let range = if w.contains(i) { 0..=pi } else { pi..=grid };
        out = out.into_iter().flat_map(|q| range.clone().map(move |x| {
            let mut q = q.clone();
            q.push(x);
            q
        })).collect();
    }
    out
}

fn winner_choice() -> Outcome {
    let mut exhaustive = 0u64;
    let mut violations = 0u64;
    let mut example = None;
    let grid: Vec<Money> = (0..=WINNER_CHOICE_GRID).collect();
    for (k, seed) in seeds(7, WINNER_CHOICE_VALUATIONS).enumerate() {
        let kind = ALL_KINDS[k % ALL_KINDS.len()];
        let inst = gen_random(&RandomInstanceSpec { seed, n: 3, max_value: 12, max_cost: 0, kind, monotone: k % 2 == 0 }).unwrap();
        for tb in [TieBreakRule::MaxCardThenLexMask, TieBreakRule::LexMask] {
            let sel = WinnerSelector::new(inst.valuation(), &tb).unwrap();
            for &a in &grid {
                for &b in &grid {
                    for &c in &grid {
                        let p = [a, b, c];
                        let w = sel.select(&p);
                        for q in perturbations(&p, w, WINNER_CHOICE_GRID) {
                            exhaustive += 1;
                            if !winner_choice_trial(&sel, &p, &q) {
                                violations += 1;
                                example.get_or_insert_with(|| format!("{:?} p {p:?} q {q:?}", inst.valuation().raw_values()));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x77);
    for t in 0..WINNER_CHOICE_RANDOM_TRIALS {
        let n = rng.gen_range(4..=8);
        let kind = ALL_KINDS[t % ALL_KINDS.len()];
        let inst = gen_random(&RandomInstanceSpec { seed: rng.gen(), n, max_value: 60, max_cost: 0, kind, monotone: rng.gen_bool(0.5) }).unwrap();
        let tb = tiebreak_for(t as u64);
        let sel = WinnerSelector::new(inst.valuation(), &tb).unwrap();
        let p: Vec<Money> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
        let w = sel.select(&p);
        let q: Vec<Money> = (0..n)
            .map(|i| if w.contains(i) { rng.gen_range(0..=p[i]) } else { rng.gen_range(p[i]..=30) })
            .collect();
        if !winner_choice_trial(&sel, &p, &q) {
            violations += 1;
            example.get_or_insert_with(|| format!("{:?} p {p:?} q {q:?}", inst.valuation().raw_values()));
        }
    }
    if violations > 0 {
        return Err(format!("{violations} violations, e.g. {}", example.unwrap()));
    }
    Ok(format!(
        "{exhaustive} exhaustive (n = 3, prices <= {WINNER_CHOICE_GRID}) and {WINNER_CHOICE_RANDOM_TRIALS} random (n 4..8) trials, 0 violations"
    ))
}

fn no_winner_froze() -> Outcome {
    let mut winners = 0;
    let mut auto_frozen_winners = 0;
    for seed in seeds(8, GS_INSTANCES) {
        let inst = random_instance(seed, 5, 20, 10, &[RandomKind::Additive, RandomKind::UnitDemand]);
        let a = DescendingAuction::new(&inst, tiebreak_for(seed), DescOrdering::default()).unwrap();
        let run = a.run_canonical().map_err(|e| e.to_string())?;
        let w = run.outcome.winners;
        winners += w.len();
        for e in run.events.iter().filter(|e| w.contains(e.seller)) {
            match e.action {
                DescEventKind::Freeze => {
                    return Err(format!("seed {seed}: winner {} froze at {} ({:?})", e.seller, e.price_after, inst.valuation().kind_name()))
                }
                DescEventKind::AutoFreeze => auto_frozen_winners += 1,
                DescEventKind::Accept => {}
            }
        }
    }
    Ok(format!("{GS_INSTANCES} instances, {winners} winners, 0 froze; {auto_frozen_winners} winners auto-froze at price 0"))
}

fn main() -> ExitCode {
    let mut h = Harness { failed: 0 };
    let s = Duration::from_secs;
    h.line("1 chopsticks equilibrium", s(1), chopsticks);
    h.line("2 nyb efficiency", s(60), nyb_efficiency);

    h.line("3a descending efficiency", s(120), desc_efficiency);
    let mut tally = Err("not computed".to_string());
    h.line("3b inductive efficiency, costs for unfrozen (every memoized state)", s(120), || {
        tally = invariant_tally();
        let t = tally.as_ref().map_err(Clone::clone)?;
        match t.literal_violations {
            0 => Ok(format!("{} states, 0 violations", t.states)),
            v => Err(format!("{v} of {} states violate, e.g. {}", t.states, t.first_violation.as_deref().unwrap_or(""))),
        }
    });
    let tally = tally.as_ref();
    h.line("3c inductive efficiency, states with unfrozen prices >= cost", s(120), || {
        let t = tally.map_err(Clone::clone)?;
        match t.hypothesis_violations {
            0 => Ok(format!("{} states, 0 violations", t.hypothesis_states)),
            v => Err(format!("{v} of {} states violate", t.hypothesis_states)),
        }
    });
    h.line("3d inductive efficiency, unfrozen at min(price, cost)", s(120), || {
        let t = tally.map_err(Clone::clone)?;
        match t.generalized_violations {
            0 => Ok(format!("{} states, 0 violations", t.states)),
            v => Err(format!("{v} of {} states violate", t.states)),
        }
    });
    h.line("4 spe verification", s(60), spe_verification);
    h.line("5 cost gap", s(5), cost_gap);
    h.line("6 concave anonymous threshold", s(30), concave_threshold);
    h.line("7 winner-choice invariance", s(60), winner_choice);
    h.line("8 no winner froze (additive, unit-demand)", s(30), no_winner_froze);

    println!("{} line(s) failed", h.failed);
    if h.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
