use super::*;
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn check_optimal(p: &LpProblem, sol: &LpSolution) {
    let a = audit(p, sol);
    assert!(a.max_violation() < 1e-6, "audit failed: {a:?}");
}

#[test]
fn small_textbook_lp() {
    // max 3a + 5b  s.t. a <= 4, 2b <= 12, 3a + 2b <= 18
    let mut p = LpProblem::new();
    let a = p.add_var(-3.0, 0.0, INF).unwrap();
    let b = p.add_var(-5.0, 0.0, INF).unwrap();
    p.add_row(&[(a, 1.0)], RowSense::Le, 4.0).unwrap();
    p.add_row(&[(b, 2.0)], RowSense::Le, 12.0).unwrap();
    p.add_row(&[(a, 3.0), (b, 2.0)], RowSense::Le, 18.0).unwrap();
    let sol = solve(&p, None, &LpOptions::default()).unwrap();
    assert!((sol.objective + 36.0).abs() < 1e-9);
    assert!((sol.x[a] - 2.0).abs() < 1e-9 && (sol.x[b] - 6.0).abs() < 1e-9);
    assert!((sol.row_duals[0]).abs() < 1e-9);
    assert!((sol.row_duals[1] + 1.5).abs() < 1e-9);
    assert!((sol.row_duals[2] + 1.0).abs() < 1e-9);
    check_optimal(&p, &sol);
}

#[test]
fn equality_and_ge_rows() {
    // min a + 2b + 3c  s.t. a + b + c = 10, b + c >= 4, c >= 1
    let mut p = LpProblem::new();
    let v: Vec<usize> = (1..=3).map(|c| p.add_var(c as f64, 0.0, INF).unwrap()).collect();
    p.add_row(&[(v[0], 1.0), (v[1], 1.0), (v[2], 1.0)], RowSense::Eq, 10.0).unwrap();
    p.add_row(&[(v[1], 1.0), (v[2], 1.0)], RowSense::Ge, 4.0).unwrap();
    p.add_row(&[(v[2], 1.0)], RowSense::Ge, 1.0).unwrap();
    let sol = solve(&p, None, &LpOptions::default()).unwrap();
    // a = 6, b = 3, c = 1
    assert!((sol.objective - 15.0).abs() < 1e-9);
    check_optimal(&p, &sol);
    assert!(sol.row_duals[1] >= -1e-9 && sol.row_duals[2] >= -1e-9);
}

#[test]
fn detects_infeasible() {
    let mut p = LpProblem::new();
    let a = p.add_var(1.0, 0.0, 5.0).unwrap();
    let b = p.add_var(1.0, 0.0, 5.0).unwrap();
    p.add_row(&[(a, 1.0), (b, 1.0)], RowSense::Ge, 11.0).unwrap();
    assert_eq!(solve(&p, None, &LpOptions::default()).unwrap_err(), LpError::Infeasible);
}

#[test]
fn detects_unbounded() {
    let mut p = LpProblem::new();
    let a = p.add_var(-1.0, 0.0, INF).unwrap();
    let b = p.add_var(0.0, 0.0, INF).unwrap();
    p.add_row(&[(a, 1.0), (b, -1.0)], RowSense::Le, 1.0).unwrap();
    assert_eq!(solve(&p, None, &LpOptions::default()).unwrap_err(), LpError::Unbounded);
}

#[test]
fn free_variable_and_no_rows() {
    let mut p = LpProblem::new();
    let a = p.add_var(1.0, -INF, INF).unwrap();
    let b = p.add_var(-1.0, -2.0, 3.0).unwrap();
    p.add_row(&[(a, 1.0), (b, 1.0)], RowSense::Ge, -4.0).unwrap();
    let sol = solve(&p, None, &LpOptions::default()).unwrap();
    // a = -7, b = 3
    assert!((sol.objective + 10.0).abs() < 1e-9);
    check_optimal(&p, &sol);

    let mut q = LpProblem::new();
    q.add_var(2.0, 1.0, 4.0).unwrap();
    q.add_var(-1.0, 1.0, 4.0).unwrap();
    let sol = solve(&q, None, &LpOptions::default()).unwrap();
    assert_eq!(sol.x, vec![1.0, 4.0]);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's example, which cycles under naive Dantzig pricing.
    let mut p = LpProblem::new();
    let c = [-0.75, 150.0, -0.02, 6.0];
    let v: Vec<usize> = c.iter().map(|&c| p.add_var(c, 0.0, INF).unwrap()).collect();
    p.add_row(&[(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], RowSense::Le, 0.0)
        .unwrap();
    p.add_row(&[(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], RowSense::Le, 0.0)
        .unwrap();
    p.add_row(&[(v[2], 1.0)], RowSense::Le, 1.0).unwrap();
    let sol = solve(&p, None, &LpOptions::default()).unwrap();
    assert!((sol.objective + 0.05).abs() < 1e-9);
    check_optimal(&p, &sol);
}

#[test]
fn warm_start_after_adding_columns_and_rows() {
    let mut p = LpProblem::new();
    let t = p.add_var(1.0, 0.0, INF).unwrap();
    let a = p.add_var(0.0, 0.0, INF).unwrap();
    p.add_row(&[(a, 1.0)], RowSense::Eq, 1.0).unwrap();
    p.add_row(&[(a, 5.0), (t, -1.0)], RowSense::Le, 0.0).unwrap();
    let first = solve(&p, None, &LpOptions::default()).unwrap();
    assert!((first.objective - 5.0).abs() < 1e-9);

    let b = p.add_column(0.0, 0.0, INF, &[(0, 1.0)]).unwrap();
    p.add_row(&[(b, 2.0), (t, -1.0)], RowSense::Le, 0.0).unwrap();
    let warm = solve(&p, Some(&first.basis), &LpOptions::default()).unwrap();
    let cold = solve(&p, None, &LpOptions::default()).unwrap();
    // a = 2/7, b = 5/7, t = 10/7
    assert!((warm.objective - 10.0 / 7.0).abs() < 1e-9);
    assert!((cold.objective - warm.objective).abs() < 1e-9);
    check_optimal(&p, &warm);
}

#[test]
fn singular_warm_basis_is_repaired() {
    let mut p = LpProblem::new();
    let a = p.add_var(-1.0, 0.0, 10.0).unwrap();
    let b = p.add_var(-1.0, 0.0, 10.0).unwrap();
    p.add_row(&[(a, 1.0), (b, 1.0)], RowSense::Le, 4.0).unwrap();
    p.add_row(&[(a, 2.0), (b, 2.0)], RowSense::Le, 9.0).unwrap();
    let bad = Basis {
        var_status: vec![VarStatus::Basic, VarStatus::Basic],
        row_status: vec![VarStatus::AtLower, VarStatus::AtLower],
    };
    let sol = solve(&p, Some(&bad), &LpOptions::default()).unwrap();
    assert!((sol.objective + 4.0).abs() < 1e-9);
    check_optimal(&p, &sol);
}

#[test]
fn iteration_limit_is_reported() {
    let mut p = LpProblem::new();
    let v: Vec<usize> = (0..4).map(|_| p.add_var(-1.0, 0.0, INF).unwrap()).collect();
    for k in 0..4 {
        p.add_row(&[(v[k], 1.0), (v[(k + 1) % 4], 1.0)], RowSense::Le, 1.0 + k as f64)
            .unwrap();
    }
    let opts = LpOptions {
        iteration_limit: Some(1),
        ..LpOptions::default()
    };
    assert!(matches!(solve(&p, None, &opts), Err(LpError::IterationLimit(1))));
}

/// Solves a dense square system by Gaussian elimination; `None` if singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let r = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[r][c].abs() < 1e-9 {
            return None;
        }
        a.swap(r, c);
        b.swap(r, c);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..n {
                    a[i][j] -= f * a[c][j];
                }
                b[i] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum over all basic feasible points of a box-bounded LP.
fn enumerate_vertices(
    cost: &[f64],
    upper: &[f64],
    rows: &[(Vec<f64>, RowSense, f64)],
) -> Option<f64> {
    let n = cost.len();
    // Each candidate active constraint as (coefficients, rhs).
    let mut cons: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), 0.0));
        cons.push((e, upper[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        x.iter().zip(upper).all(|(&v, &u)| v >= -tol && v <= u + tol)
            && rows.iter().all(|(a, s, b)| {
                let act: f64 = a.iter().zip(x).map(|(c, v)| c * v).sum();
                match s {
                    RowSense::Le => act <= b + tol,
                    RowSense::Ge => act >= b - tol,
                    RowSense::Eq => (act - b).abs() <= tol,
                }
            })
    };
    let mut best: Option<f64> = None;
    let total = cons.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&k| cons[k].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&k| cons[k].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(&x) {
                let obj: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                break;
            }
        }
        pick[i] += 1;
        for k in i + 1..n {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

fn small_int() -> impl Strategy<Value = f64> {
    (-4i32..=4).prop_map(f64::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_vertex_enumeration(
        cost in proptest::collection::vec(small_int(), 5),
        upper in proptest::collection::vec(1i32..=5, 5),
        coefs in proptest::collection::vec(proptest::collection::vec(small_int(), 5), 5),
        senses in proptest::collection::vec(0u8..3, 5),
        rhs in proptest::collection::vec(-3i32..=8, 5),
    ) {
        let upper: Vec<f64> = upper.into_iter().map(f64::from).collect();
        let rows: Vec<(Vec<f64>, RowSense, f64)> = coefs
            .into_iter()
            .zip(senses)
            .zip(rhs)
            .map(|((a, s), b)| {
                let s = match s { 0 => RowSense::Le, 1 => RowSense::Ge, _ => RowSense::Eq };
                (a, s, f64::from(b))
            })
            .collect();
        let mut p = LpProblem::new();
        for j in 0..5 {
            p.add_var(cost[j], 0.0, upper[j]).unwrap();
        }
        for (a, s, b) in &rows {
            let coeffs: Vec<(usize, f64)> = a.iter().copied().enumerate().collect();
            p.add_row(&coeffs, *s, *b).unwrap();
        }
        let oracle = enumerate_vertices(&cost, &upper, &rows);
        match (solve(&p, None, &LpOptions::default()), oracle) {
            (Ok(sol), Some(best)) => {
                prop_assert!((sol.objective - best).abs() < 1e-6, "{} vs {}", sol.objective, best);
                prop_assert!(audit(&p, &sol).max_violation() < 1e-6);
            }
            (Err(LpError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?} vs oracle {:?}", got.map(|s| s.objective), want),
        }
    }

    #[test]
    fn warm_start_agrees_with_cold(
        cost in proptest::collection::vec(small_int(), 6),
        coefs in proptest::collection::vec(proptest::collection::vec(small_int(), 6), 4),
        rhs in proptest::collection::vec(1i32..=8, 4),
        new_col in proptest::collection::vec(small_int(), 4),
        new_cost in small_int(),
    ) {
        let mut p = LpProblem::new();
        for &c in &cost {
            p.add_var(c, 0.0, 3.0).unwrap();
        }
        for (a, &b) in coefs.iter().zip(&rhs) {
            let coeffs: Vec<(usize, f64)> = a.iter().copied().enumerate().collect();
            p.add_row(&coeffs, RowSense::Le, f64::from(b)).unwrap();
        }
        let first = solve(&p, None, &LpOptions::default()).unwrap();
        let entries: Vec<(usize, f64)> = new_col.iter().copied().enumerate().collect();
        p.add_column(new_cost, 0.0, 2.0, &entries).unwrap();
        let warm = solve(&p, Some(&first.basis), &LpOptions::default()).unwrap();
        let cold = solve(&p, None, &LpOptions::default()).unwrap();
        prop_assert!((warm.objective - cold.objective).abs() < 1e-7);
        prop_assert!(audit(&p, &warm).max_violation() < 1e-6);
    }
}

#[test]
fn single_ge_row_binds() {
    // min x  s.t. x >= 3, 0 <= x <= 10
    let mut p = LpProblem::new();
    let x = p.add_var(1.0, 0.0, 10.0).unwrap();
    p.add_row(&[(x, 1.0)], RowSense::Ge, 3.0).unwrap();
    let sol = solve(&p, None, &LpOptions::default()).unwrap();
    assert!((sol.x[x] - 3.0).abs() < 1e-9);
    assert!((sol.row_duals[0] - 1.0).abs() < 1e-9);
    check_optimal(&p, &sol);
}

#[test]
fn fixed_variable_cannot_meet_equality() {
    let mut p = LpProblem::new();
    let x = p.add_var(1.0, 0.0, 0.0).unwrap();
    p.add_row(&[(x, 1.0)], RowSense::Eq, 1.0).unwrap();
    assert_eq!(solve(&p, None, &LpOptions::default()).unwrap_err(), LpError::Infeasible);
}
