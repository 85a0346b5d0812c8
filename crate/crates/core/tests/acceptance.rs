//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p career-game --test acceptance -- --nocapture` to see them.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use career_game::config::Preset;
use career_game::distributions::{self, DiscreteDistribution};
use career_game::oracle;
use career_game::simulate::{self, InitialState};
use career_game::solver::{self, Action, ModelConfig, SolveResult, StateMatrix};
use career_game::trends::{self, CodedAd, CoderTable};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {id} {name}: {status} ({detail})");
    assert!(pass, "criterion {id} {name} failed: {detail}");
}

fn solve_preset(preset: Preset) -> (ModelConfig, SolveResult, Duration) {
    let run = preset.config();
    let model = run.validate().unwrap();
    let start = Instant::now();
    let result = solver::solve(&model, run.solver.tolerance, run.solver.max_iterations).unwrap();
    (model, result, start.elapsed())
}

#[test]
fn criterion_1_fig4a_field_switching_dominates() {
    let (model, result, elapsed) = solve_preset(Preset::Fig4a);
    let grid = model.grid();
    assert_eq!(grid.dims(), (51, 51));
    let field_share = result.action_share(Action::NewField);
    let (n, m) = grid.dims();
    let corner_stay = result.policy.at(n - 1, m - 1) == Action::Stay;
    assert_eq!(grid.theta_values[n - 1], 5.0);
    assert_eq!(grid.epsilon_values[m - 1], 5.0);
    let pass = field_share > 0.5 && corner_stay && elapsed < Duration::from_secs(5);
    report(
        1,
        "fig4a",
        pass,
        format!(
            "new_field share {field_share:.4} > 0.5, stay at (5,5) = {corner_stay}, solve {:.3}s < 5s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_fig4b_less_field_switching() {
    let (_, a, _) = solve_preset(Preset::Fig4a);
    let (_, b, _) = solve_preset(Preset::Fig4b);
    let field_a = a.action_share(Action::NewField);
    let field_b = b.action_share(Action::NewField);
    let settle_a = a.action_share(Action::Stay) + a.action_share(Action::NewTopic);
    let settle_b = b.action_share(Action::Stay) + b.action_share(Action::NewTopic);
    report(
        2,
        "fig4b-vs-fig4a",
        field_b < field_a && settle_b > settle_a,
        format!("new_field {field_b:.4} < {field_a:.4}; stay+new_topic {settle_b:.4} > {settle_a:.4}"),
    );
}

#[test]
fn criterion_3_fig5_less_field_switching() {
    let (_, b, _) = solve_preset(Preset::Fig4b);
    let (_, c, _) = solve_preset(Preset::Fig5);
    let field_b = b.action_share(Action::NewField);
    let field_c = c.action_share(Action::NewField);
    report(
        3,
        "fig5-vs-fig4b",
        field_c < field_b,
        format!("new_field {field_c:.4} < {field_b:.4}"),
    );
}

#[test]
fn criterion_4_oracle_equivalence() {
    let model = ModelConfig::new(
        0.5,
        distributions::uniform_on_grid(3).unwrap(),
        distributions::uniform_on_grid(3).unwrap(),
    )
    .unwrap();
    let start = Instant::now();
    let (best, _) = oracle::enumerate_and_maximize(&model).unwrap();
    let solved = solver::solve(&model, 1e-11, 100_000).unwrap();
    let elapsed = start.elapsed();
    let max_diff = best.sup_distance(&solved.value);
    report(
        4,
        "oracle-3x3",
        max_diff <= 1e-8 && elapsed < Duration::from_secs(10),
        format!(
            "19683 policies, max |oracle - solver| = {max_diff:e} <= 1e-8, {:.3}s < 10s",
            elapsed.as_secs_f64()
        ),
    );
}

fn random_distribution(rng: &mut ChaCha8Rng, points: usize) -> DiscreteDistribution {
    match rng.random_range(0..4) {
        0 => distributions::uniform_on_grid(points).unwrap(),
        1 => distributions::beta_binomial_on_grid(points, rng.random_range(0.2..20.0), rng.random_range(0.2..20.0))
            .unwrap(),
        2 => {
            let base = distributions::beta_binomial_on_grid(
                points,
                rng.random_range(0.2..20.0),
                rng.random_range(0.2..20.0),
            )
            .unwrap();
            distributions::inflate_at_zero(&base, rng.random_range(0.0..1.0)).unwrap()
        }
        _ => {
            // Arbitrary weights, some exactly zero.
            let w: Vec<f64> = (0..points)
                .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) })
                .collect();
            let total: f64 = w.iter().sum();
            let probs = if total > 0.0 {
                w.iter().map(|x| x / total).collect()
            } else {
                vec![1.0 / points as f64; points]
            };
            let support = distributions::IncomeRange::default().grid(points);
            DiscreteDistribution::new(support, probs).unwrap()
        }
    }
}

#[test]
fn criterion_5_contraction_monotonicity_closed_form() {
    const TOLERANCE: f64 = 1e-9;
    let betas = [0.3, 0.5, 0.9, 0.95];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for case in 0..100 {
        let beta = betas[case % betas.len()];
        let rows = rng.random_range(1..=21);
        let cols = rng.random_range(1..=21);
        let model = ModelConfig::new(
            beta,
            random_distribution(&mut rng, rows),
            random_distribution(&mut rng, cols),
        )
        .unwrap();
        let result = solver::solve(&model, TOLERANCE, 1_000_000).unwrap();
        let grid = model.grid();

        let contraction = result
            .residuals
            .windows(2)
            .all(|w| w[1] <= beta * w[0] + 1e-10);
        let v = &result.value;
        let monotone = (0..rows).all(|i| (1..cols).all(|j| v.at(i, j) >= v.at(i, j - 1) - 1e-10))
            && (1..rows).all(|i| (0..cols).all(|j| v.at(i, j) >= v.at(i - 1, j) - 1e-10));
        let closed_form = result.policy.iter_cells().all(|(i, j, &a)| {
            a != Action::Stay
                || (v.at(i, j) - (grid.theta_values[i] + grid.epsilon_values[j]) / (1.0 - beta)).abs()
                    < 10.0 * TOLERANCE
        });
        if !(contraction && monotone && closed_form) {
            failures.push(format!(
                "case {case} ({rows}x{cols}, beta {beta}): contraction {contraction}, monotone {monotone}, closed form {closed_form}"
            ));
        }
    }
    report(
        5,
        "contraction-monotone-closed-form",
        failures.is_empty(),
        if failures.is_empty() {
            "100 random configs".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_6_simulation_consistency() {
    let run = Preset::Fig4a.config();
    let (model, result, _) = solve_preset(Preset::Fig4a);
    let start = Instant::now();
    let (rows, cols) = model.grid().dims();
    let stay = StateMatrix::filled(rows, cols, Action::Stay);
    let field = StateMatrix::filled(rows, cols, Action::NewField);
    let summary = simulate::compare_policies(
        &model,
        &[("optimal", &result.policy), ("always_stay", &stay), ("always_new_field", &field)],
        InitialState::Draw,
        10_000,
        400,
        run.simulate.seed,
    )
    .unwrap();
    let elapsed = start.elapsed();

    let expected: f64 = result
        .value
        .iter_cells()
        .map(|(i, j, &v)| model.field().probs()[i] * model.topic().probs()[j] * v)
        .sum();
    let opt = &summary[0];
    let z = (opt.mean - expected).abs() / opt.std_error;
    let dominates = opt.mean >= summary[1].mean && opt.mean >= summary[2].mean;
    report(
        6,
        "simulation",
        z <= 3.0 && dominates && elapsed < Duration::from_secs(30),
        format!(
            "mean {:.4} vs E[V] {expected:.4} ({z:.2} SE <= 3); stay {:.4}, new_field {:.4}; {:.2}s < 30s",
            opt.mean,
            summary[1].mean,
            summary[2].mean,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_7_kappa() {
    let perfect = CoderTable::from_pairs([("A", "A"), ("B", "B"), ("B", "B"), ("A", "A")]);
    let k1 = trends::cohens_kappa(&perfect).unwrap().kappa;

    let chance = CoderTable::from_pairs([
        ("A", "A"),
        ("A", "B"),
        ("B", "A"),
        ("B", "B"),
        ("A", "A"),
        ("A", "B"),
        ("B", "A"),
        ("B", "B"),
    ]);
    let r0 = trends::cohens_kappa(&chance).unwrap();

    let mut pairs = vec![("A", "A"); 18];
    pairs.extend([("A", "B"); 2]);
    pairs.extend([("B", "A"); 2]);
    pairs.extend([("B", "B"); 18]);
    let r8 = trends::cohens_kappa(&CoderTable::from_pairs(pairs)).unwrap();

    let pass = k1 == 1.0
        && r0.p_o == r0.p_e
        && r0.kappa.abs() <= 1e-12
        && (r8.p_o - 0.9).abs() <= 1e-12
        && (r8.p_e - 0.5).abs() <= 1e-12
        && (r8.kappa - 0.8).abs() <= 1e-12;
    report(
        7,
        "kappa",
        pass,
        format!("perfect {k1}, chance {:e}, 40-item {}", r0.kappa, r8.kappa),
    );
}

fn corpus() -> Vec<CodedAd> {
    vec![
        CodedAd::new(1995, "1995-01", "a1", ["operating_systems", "networks"]),
        CodedAd::new(1995, "1995-03", "a2", ["networks"]),
        CodedAd::new(1995, "1995-05", "a3", ["graphics", "hci", "networks"]),
        CodedAd::new(2005, "2005-01", "b1", ["security"]),
        CodedAd::new(2005, "2005-03", "b2", ["security", "ai_ml"]),
        CodedAd::new(2015, "2015-01", "c1", ["ai_ml", "big_data"]),
        CodedAd::new(2015, "2015-01", "c2", ["ai_ml"]),
        CodedAd::new(2015, "2015-03", "c3", ["other", "security", "ai_ml", "tcs"]),
    ]
}

#[test]
fn criterion_8_trend_matrix() {
    let scheme = trends::default_scheme();
    let ads = corpus();
    let m = trends::trend_matrix(&ads, &scheme).unwrap();

    // Hand counts: 1995 N=6, 2005 N=3, 2015 N=7.
    let expected: [(&str, i32, f64); 11] = [
        ("networks", 1995, 3.0 / 6.0),
        ("operating_systems", 1995, 1.0 / 6.0),
        ("graphics", 1995, 1.0 / 6.0),
        ("hci", 1995, 1.0 / 6.0),
        ("security", 2005, 2.0 / 3.0),
        ("ai_ml", 2005, 1.0 / 3.0),
        ("ai_ml", 2015, 3.0 / 7.0),
        ("big_data", 2015, 1.0 / 7.0),
        ("other", 2015, 1.0 / 7.0),
        ("security", 2015, 1.0 / 7.0),
        ("tcs", 2015, 1.0 / 7.0),
    ];
    let mut max_err: f64 = 0.0;
    for (c, y, p) in expected {
        max_err = max_err.max((m.proportion(c, y).unwrap() - p).abs());
    }
    let listed: usize = m.long_rows().filter(|&(_, _, p)| p > 0.0).count();
    let columns_ok = (0..m.years.len()).all(|j| (m.column_sum(j) - 1.0).abs() <= 1e-9);

    let mut reversed = ads.clone();
    reversed.reverse();
    let mut rotated = ads.clone();
    rotated.rotate_left(3);
    let order_free = trends::trend_matrix(&reversed, &scheme).unwrap() == m
        && trends::trend_matrix(&rotated, &scheme).unwrap() == m;

    report(
        8,
        "trend-matrix",
        max_err <= 1e-12 && listed == expected.len() && m.yearly_totals == vec![6, 3, 7] && columns_ok && order_free,
        format!("max error {max_err:e}, totals {:?}, columns sum to 1: {columns_ok}, order invariant: {order_free}", m.yearly_totals),
    );
}
