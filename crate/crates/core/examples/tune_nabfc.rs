//! Seeded local search over the NABFC gains.
//!
//! Usage: `cargo run --release --example tune_nabfc -- [config.toml] [iterations]`
//!
//! Starting from the given config (built-in defaults when absent), each
//! iteration perturbs the surface, robust and adaptation gains log-uniformly
//! and keeps the candidate when it lowers the score: the worst force/angle
//! settling time over a 1 s run plus 5 x the force overshoot above 6%.
//! The best config is printed as TOML. The shipped defaults came out of
//! this search (ChaCha8 seed 11) started from slow adaptation.

use flexgrasp::scenario::{run_scenario, summarize, RunSummary, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 11;

fn score(cfg: &ScenarioConfig) -> (f64, RunSummary) {
    let run = run_scenario(cfg).expect("candidate config is valid");
    let s = summarize(&run.trace);
    if run.aborted.is_some() {
        return (f64::INFINITY, s);
    }
    let worst = s
        .force_settling
        .iter()
        .chain(&s.angle_settling)
        .map(|t| t.unwrap_or(cfg.duration * 10.0))
        .fold(0.0, f64::max);
    let overshoot = s.force_overshoot[0].max(s.force_overshoot[1]);
    (worst + 5.0 * (overshoot - 0.06).max(0.0), s)
}

fn perturb(rng: &mut ChaCha8Rng, x: &mut f64, width: f64) {
    *x *= rng.gen_range(-width..width).exp();
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut base = match args.next() {
        Some(path) => ScenarioConfig::load(path.as_ref())?,
        None => ScenarioConfig::default(),
    };
    let iterations: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(40);
    base.duration = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut best_score, _) = score(&base);
    let mut best = base;
    eprintln!("start score {best_score:.3}");
    for it in 0..iterations {
        let mut cand = best.clone();
        let g = &mut cand.nabfc;
        perturb(&mut rng, &mut g.k, 0.5);
        perturb(&mut rng, &mut g.mu_bar, 0.4);
        perturb(&mut rng, &mut g.c1, 0.4);
        for x in [&mut g.eta, &mut g.a1, &mut g.gamma1, &mut g.b1] {
            perturb(&mut rng, x, 0.8);
        }
        for p in g.posture.iter_mut() {
            perturb(&mut rng, &mut p.k, 0.4);
            perturb(&mut rng, &mut p.mu, 0.3);
            perturb(&mut rng, &mut p.c3, 0.3);
        }
        let (sc, s) = score(&cand);
        if sc < best_score {
            eprintln!(
                "{it}: score {sc:.3}, force settling {:?}, angle settling {:?}",
                s.force_settling, s.angle_settling
            );
            best_score = sc;
            best = cand;
        }
    }
    best.duration = ScenarioConfig::default().duration;
    print!("{}", best.to_toml());
    Ok(())
}
