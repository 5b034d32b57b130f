//! Cross-validation of the LP relaxation against an independent dense
//! two-phase simplex implemented right here, fed through the LP text format
//! so the writer/parser pair is exercised on the same programs.

use hetnet_offload::ilp::{
    parse_lp, solve_lp_relaxation, to_lp_string, BinaryLinearProgram, LpOutcome, Relation, Sense,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-7;

/// Dense two-phase primal simplex with Bland's rule over the box [0,1]^n
/// (upper bounds are added as explicit rows). Returns the optimal objective
/// or `None` when infeasible; unboundedness cannot occur on a box.
fn dense_simplex(p: &BinaryLinearProgram) -> Option<f64> {
    let n = p.num_vars();
    // Standard-form rows: coefficients over structural vars, then rhs >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        rows.push((a, Relation::Le, 1.0));
    }
    for row in &p.rows {
        let mut a = vec![0.0; n];
        for &(j, c) in &row.coeffs {
            a[j] += c;
        }
        rows.push((a, row.relation, row.rhs));
    }
    for (a, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for c in a.iter_mut() {
                *c = -*c;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    // Columns: structural | slack/surplus | artificial. Count extras first.
    let mut num_slack = 0;
    for (_, rel, _) in &rows {
        if !matches!(rel, Relation::Eq) {
            num_slack += 1;
        }
    }
    let total = n + num_slack + m; // one artificial per row at most
    let mut tab = vec![vec![0.0f64; total + 1]; m];
    let mut basis = vec![usize::MAX; m];
    let mut artificial = vec![false; total];
    let mut slack_idx = n;
    let mut art_idx = n + num_slack;
    let mut num_art_cols = 0;
    for (i, (a, rel, rhs)) in rows.iter().enumerate() {
        tab[i][..n].copy_from_slice(a);
        tab[i][total] = *rhs;
        match rel {
            Relation::Le => {
                tab[i][slack_idx] = 1.0;
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            Relation::Ge => {
                tab[i][slack_idx] = -1.0;
                slack_idx += 1;
                tab[i][art_idx] = 1.0;
                artificial[art_idx] = true;
                basis[i] = art_idx;
                art_idx += 1;
                num_art_cols += 1;
            }
            Relation::Eq => {
                tab[i][art_idx] = 1.0;
                artificial[art_idx] = true;
                basis[i] = art_idx;
                art_idx += 1;
                num_art_cols += 1;
            }
        }
    }
    let ncols = n + num_slack + num_art_cols;

    let pivot = |tab: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, c: usize, total: usize| {
        let pv = tab[r][c];
        for v in tab[r].iter_mut() {
            *v /= pv;
        }
        for i in 0..tab.len() {
            if i != r && tab[i][c].abs() > 0.0 {
                let f = tab[i][c];
                for j in 0..=total {
                    tab[i][j] -= f * tab[r][j];
                }
            }
        }
        basis[r] = c;
    };

    // Run simplex on the given cost vector with Bland's rule, restricted to
    // columns `allowed`. Returns the objective of the final basis.
    let run = |tab: &mut Vec<Vec<f64>>,
               basis: &mut Vec<usize>,
               cost: &[f64],
               allowed: &dyn Fn(usize) -> bool| {
        loop {
            // Reduced costs from scratch (dense, tiny programs).
            let mut y = vec![0.0f64; ncols];
            for j in 0..ncols {
                y[j] = cost[j];
            }
            let mut obj = 0.0;
            for (i, &b) in basis.iter().enumerate() {
                if cost[b] != 0.0 {
                    obj += cost[b] * tab[i][total];
                    for j in 0..ncols {
                        y[j] -= cost[b] * tab[i][j];
                    }
                }
            }
            let entering = (0..ncols).find(|&j| allowed(j) && y[j] < -1e-9);
            let Some(e) = entering else {
                return obj;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..tab.len() {
                if tab[i][e] > 1e-11 {
                    let ratio = tab[i][total] / tab[i][e];
                    let better = match leave {
                        None => true,
                        // Bland: smallest ratio, then smallest basis index.
                        Some((li, lr)) => {
                            ratio < lr - 1e-11 || (ratio < lr + 1e-11 && basis[i] < basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (r, _) = leave.expect("box-bounded LP cannot be unbounded");
            pivot(tab, basis, r, e, total);
        }
    };

    // Phase 1.
    let mut cost1 = vec![0.0f64; ncols];
    for (j, c) in cost1.iter_mut().enumerate() {
        if artificial[j] {
            *c = 1.0;
        }
    }
    let art_sum = run(&mut tab, &mut basis, &cost1, &|_| true);
    if art_sum > 1e-7 {
        return None;
    }
    // Drive leftover artificials out of the basis where possible.
    for i in 0..m {
        if artificial[basis[i]] {
            if let Some(c) = (0..ncols).find(|&j| !artificial[j] && tab[i][j].abs() > 1e-9) {
                pivot(&mut tab, &mut basis, i, c, total);
            }
        }
    }

    // Phase 2: original costs, artificials barred from entering.
    let mut cost2 = vec![0.0f64; ncols];
    cost2[..n].copy_from_slice(&p.objective);
    let obj = run(&mut tab, &mut basis, &cost2, &|j| !artificial[j]);
    Some(obj + p.objective_offset)
}

fn random_program(rng: &mut ChaCha8Rng) -> BinaryLinearProgram {
    let n = rng.random_range(1..=6);
    let mut p = BinaryLinearProgram::new(Sense::Minimize);
    for j in 0..n {
        let v = p.add_var(format!("x{j}"));
        p.objective[v] = rng.random_range(-6..=6) as f64;
    }
    for _ in 0..rng.random_range(1..=5) {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-5..=5) as f64));
            }
        }
        let rel = match rng.random_range(0..4) {
            0 => Relation::Ge,
            1 => Relation::Eq,
            _ => Relation::Le,
        };
        p.add_row(coeffs, rel, rng.random_range(-4..=4) as f64);
    }
    p
}

#[test]
fn lp_relaxation_matches_independent_dense_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut checked = 0;
    while checked < 150 {
        let p = random_program(&mut rng);
        if p.validate().is_err() {
            continue; // rejected a variable that landed in no row
        }
        // Route the program through its text form first.
        let q = parse_lp(&to_lp_string(&p)).expect("roundtrip");
        assert_eq!(p, q);
        let fast = solve_lp_relaxation(&q).expect("relaxation");
        let reference = dense_simplex(&p);
        match (fast, reference) {
            (LpOutcome::Optimal { objective, .. }, Some(expect)) => {
                assert!(
                    (objective - expect).abs() <= TOL * (1.0 + expect.abs()),
                    "objective {objective} vs reference {expect}\n{}",
                    to_lp_string(&p)
                );
            }
            (LpOutcome::Infeasible, None) => {}
            (got, want) => panic!("disagreement: {got:?} vs {want:?}\n{}", to_lp_string(&p)),
        }
        checked += 1;
    }
}

#[test]
fn dense_simplex_agrees_on_known_programs() {
    // min x0 + x1 s.t. x0 + x1 >= 1  ->  1 at any cover point.
    let mut p = BinaryLinearProgram::new(Sense::Minimize);
    let a = p.add_var("a");
    let b = p.add_var("b");
    p.objective[a] = 1.0;
    p.objective[b] = 1.0;
    p.add_row(vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
    assert!((dense_simplex(&p).unwrap() - 1.0).abs() < 1e-9);

    // Contradictory pair is infeasible.
    let mut q = BinaryLinearProgram::new(Sense::Minimize);
    let v = q.add_var("v");
    q.objective[v] = 1.0;
    q.add_row(vec![(v, 1.0)], Relation::Ge, 1.0);
    q.add_row(vec![(v, 1.0)], Relation::Le, 0.0);
    assert!(dense_simplex(&q).is_none());

    // Fractional optimum: min -x s.t. 2x <= 1 -> -0.5.
    let mut r = BinaryLinearProgram::new(Sense::Minimize);
    let w = r.add_var("w");
    r.objective[w] = -1.0;
    r.add_row(vec![(w, 2.0)], Relation::Le, 1.0);
    assert!((dense_simplex(&r).unwrap() + 0.5).abs() < 1e-9);
}
