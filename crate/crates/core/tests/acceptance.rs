//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use detcover::hypergraph::{generate, project, EdgeAssignment, GenSpec, Hypergraph};
use detcover::matchweight::{build_edmonds, loop_weights, w2f_eval};
use detcover::oracle::{dlx_count, enumerate_matchings, ie_count, strata, symbolic_w2f};
use detcover::params::{general_bound, general_bound_constant, kdm_base, optimize};
use detcover::solver::{kdm_sieve, sieve_decide_parallel, solve_auto, solve_kdm, solve_xkc};
use detcover::{FieldElem, FieldSpec, SieveConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const C_K: [(usize, f64, f64, f64); 6] = [
    (3, 0.961, 0.679, 1.496),
    (4, 0.936, 0.613, 1.642),
    (5, 0.921, 0.583, 1.721),
    (6, 0.912, 0.565, 1.771),
    (7, 0.905, 0.554, 1.806),
    (8, 0.900, 0.546, 1.832),
];

/// (k, t, I^{1/n}, c_k) as printed.
const T_I_C: [(usize, f64, f64, f64); 6] = [
    (3, 0.547, 1.092, 1.496),
    (4, 0.387, 1.073, 1.642),
    (5, 0.301, 1.060, 1.721),
    (6, 0.246, 1.050, 1.771),
    (7, 0.208, 1.043, 1.806),
    (8, 0.181, 1.038, 1.832),
];

const KDM_BASES: [f64; 6] = [1.260, 1.414, 1.516, 1.587, 1.641, 1.682];

fn workers() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

/// Runs `job(i)` for `i in 0..count` on scoped threads, keeping order.
fn par_map<T: Send>(count: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let w = workers().min(count.max(1));
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (chunk_id, chunk) in slots.chunks_mut(count.div_ceil(w).max(1)).enumerate() {
            let job = &job;
            let base = chunk_id * count.div_ceil(w).max(1);
            scope.spawn(move || {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(job(base + off));
                }
            });
        }
    });
    slots.into_iter().map(Option::unwrap).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c1_optimizer() -> Outcome {
    let start = Instant::now();
    let mut worst_c: f64 = 0.0;
    let mut worst_tau: f64 = 0.0;
    for &(k, tau12, tau2, c) in &C_K {
        let row = optimize(k).map_err(|e| e.to_string())?;
        worst_c = worst_c.max((row.c_k - c).abs());
        worst_tau = worst_tau
            .max((row.tau12 - tau12).abs())
            .max((row.tau2 - tau2).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("max |dc| = {worst_c:.5}, max |dtau| = {worst_tau:.4}, {secs:.2} s");
    if worst_c <= 0.001 && worst_tau <= 0.01 && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_kdm_bases() -> Outcome {
    let worst = (3..=8)
        .zip(KDM_BASES)
        .map(|(k, want)| (kdm_base(k).unwrap() - want).abs())
        .fold(0.0, f64::max);
    let msg = format!("max deviation {worst:.5}");
    if worst <= 0.001 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_general_bound() -> Outcome {
    let c = general_bound_constant(3).map_err(|e| e.to_string())?;
    let mut below = Vec::new();
    for k in 3..=8 {
        let opt = optimize(k).unwrap().c_k;
        if general_bound(k) < opt {
            below.push(k);
        }
    }
    let msg = format!("constant {c:.4}, bound below optimum for k in {below:?}");
    if (c - 8.415).abs() <= 0.01 && below.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_identity() -> Outcome {
    let worst = T_I_C
        .iter()
        .map(|&(_, t, i, c)| (c - 2f64.powf(1.0 - t) * i).abs())
        .fold(0.0, f64::max);
    let msg = format!("max |c_k - 2^(1-t) I^(1/n)| = {worst:.5}");
    if worst <= 0.002 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Sum over perfect matchings of a bipartite multigraph of `prod r(e)`,
/// by recursion over left vertices.
fn bipartite_matching_sum(
    field: &FieldSpec,
    adj: &[Vec<(usize, usize)>],
    r: &EdgeAssignment,
    row: usize,
    used: &mut [bool],
) -> FieldElem {
    if row == adj.len() {
        return FieldElem::ONE;
    }
    let mut total = FieldElem::ZERO;
    for &(col, edge) in &adj[row] {
        if !used[col] {
            used[col] = true;
            let rest = bipartite_matching_sum(field, adj, r, row + 1, used);
            used[col] = false;
            total += field.mul(r.get(edge), rest);
        }
    }
    total
}

fn c5_determinant_identities() -> Outcome {
    let field = FieldSpec::gf64();
    let results = par_map(500, |i| -> Result<(), String> {
        let mut g = rng(5_000 + i as u64);
        // bipartite: blocks 0 and 1 of a 3-partite instance, |U| <= 8
        let side = g.random_range(1..=4);
        let h = {
            let spec = GenSpec {
                k: 3,
                n: 3 * side,
                edge_count: g.random_range(side..=4 * side),
                plant: g.random_bool(0.5),
                kdm: true,
            };
            generate(&mut g, spec)
        }
        .map_err(|e| e.to_string())?;
        let blocks = h.partition().unwrap();
        let (left, right) = (blocks[0].clone(), blocks[1].clone());
        let u: Vec<usize> = left.iter().chain(&right).copied().collect();
        let view = project(&h, &u).map_err(|e| e.to_string())?;
        let r = EdgeAssignment::random(&field, &mut g, h.num_edges());
        let det = build_edmonds(&view, &r, &left, &right)
            .map_err(|e| e.to_string())?
            .determinant(&field);
        let mut adj = vec![Vec::new(); side];
        for e in 0..h.num_edges() {
            let ed = h.edge(e);
            let row = left.iter().position(|v| ed.contains(v)).unwrap();
            let col = right.iter().position(|v| ed.contains(v)).unwrap();
            adj[row].push((col, e));
        }
        let want = bipartite_matching_sum(&field, &adj, &r, 0, &mut vec![false; side]);
        if det != want {
            return Err(format!("Edmonds mismatch on trial {i}"));
        }

        // general multigraph with loops and pairs
        let k = g.random_range(3..=4);
        let n = k * g.random_range(2..=4);
        let h = {
            let spec = GenSpec {
                k,
                n,
                edge_count: g.random_range(1..=14),
                plant: false,
                kdm: false,
            };
            generate(&mut g, spec)
        }
        .map_err(|e| e.to_string())?;
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut g);
        let u_len = g.random_range(1..=n.min(8));
        let u = &verts[..u_len];
        let full = project(&h, u).map_err(|e| e.to_string())?;
        let dropped = full.dropped.clone();
        let view = full.filter_edges(|e| !dropped.contains(&e));
        let r = EdgeAssignment::random(&field, &mut g, h.num_edges());
        let got = loop_weights(&field, &view, &r)
            .map_err(|e| e.to_string())?
            .m_values;
        let terms = enumerate_matchings(&field, &view, &r).map_err(|e| e.to_string())?;
        if got != strata(&terms, view.u_len()) {
            return Err(format!("Tutte strata mismatch on trial {i}"));
        }
        Ok(())
    });
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    if failures.is_empty() {
        Ok("500 Edmonds + 500 Tutte trials, 0 mismatches".into())
    } else {
        Err(format!(
            "{} mismatches, first: {}",
            failures.len(),
            failures[0]
        ))
    }
}

fn c6_w2f() -> Outcome {
    let field = FieldSpec::gf64();
    let results = par_map(300, |i| -> Result<(), String> {
        let mut g = rng(6_000 + i as u64);
        let k = g.random_range(2..=4);
        let n = k * g.random_range(1..=12 / k);
        let h = {
            let spec = GenSpec {
                k,
                n,
                edge_count: g.random_range(n / k..=20),
                plant: g.random_bool(0.5),
                kdm: false,
            };
            generate(&mut g, spec)
        }
        .map_err(|e| e.to_string())?;
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut g);
        let u_len = g.random_range(0..=n.min(8));
        let (u, rest) = verts.split_at(u_len);
        let x: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|_| g.random_bool(0.3))
            .collect();
        let mask = h.vertex_mask(u).map_err(|e| e.to_string())?;
        let (h_u, _) = h.retain_edges(|id, _| h.meet_count(id, &mask) <= 2);
        let r = EdgeAssignment::random(&field, &mut g, h_u.num_edges());
        let view = project(&h_u, u)
            .and_then(|v| v.restrict_avoiding(&h_u, &x))
            .map_err(|e| e.to_string())?;
        let fast = w2f_eval(&field, &view, &r, n, k).map_err(|e| e.to_string())?;
        let slow = symbolic_w2f(&field, &h_u, u, &x, &r).map_err(|e| e.to_string())?;
        if fast == slow {
            Ok(())
        } else {
            Err(format!("tuple {i}: {fast} vs {slow}"))
        }
    });
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    if failures.is_empty() {
        Ok("300 tuples, 0 mismatches".into())
    } else {
        Err(format!(
            "{} mismatches, first: {}",
            failures.len(),
            failures[0]
        ))
    }
}

fn c7_oracles() -> Outcome {
    let results = par_map(200, |i| {
        let mut g = rng(7_000 + i as u64);
        let k = if i % 2 == 0 { 3 } else { 4 };
        let n = k * g.random_range(1..=12 / k);
        let h = {
            let spec = GenSpec {
                k,
                n,
                edge_count: g.random_range(n / k..=3 * n),
                plant: g.random_bool(0.6),
                kdm: false,
            };
            generate(&mut g, spec)
        }
        .unwrap();
        let dlx = dlx_count(&h);
        let ie = ie_count(&h).unwrap();
        (dlx == ie, dlx.exists())
    });
    let bad = results.iter().filter(|r| !r.0).count();
    let with_cover = results.iter().filter(|r| r.1).count();
    let msg = format!("200 instances ({with_cover} with covers), {bad} disagreements");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_instance(g: &mut ChaCha8Rng) -> Hypergraph {
    let k = g.random_range(2..=4);
    let kdm = g.random_bool(0.4);
    let n = k * g.random_range(1..=if k == 2 { 5 } else { 9 / k + 1 });
    let edge_count = g.random_range(1..=2 * n);
    let plant = g.random_bool(0.5) && edge_count >= n / k;
    generate(
        g,
        GenSpec {
            k,
            n,
            edge_count,
            plant,
            kdm,
        },
    )
    .unwrap()
}

fn c8_soundness() -> Outcome {
    const RUNS: usize = 10_000;
    let results = par_map(RUNS, |i| {
        let mut g = rng(8_000_000 + i as u64);
        let h = random_instance(&mut g);
        let cfg = SieveConfig {
            seed: i as u64,
            ..SieveConfig::default()
        };
        let d = solve_auto(&h, &cfg).unwrap();
        let solvable = dlx_count(&h).exists();
        (d.is_yes(), solvable)
    });
    let false_yes = results.iter().filter(|&&(y, s)| y && !s).count();
    let unsolvable = results.iter().filter(|r| !r.1).count();
    let solvable_yes = results.iter().filter(|&&(y, s)| y && s).count();
    let msg = format!(
        "{RUNS} runs: {} solvable ({solvable_yes} yes), {unsolvable} unsolvable, {false_yes} unsound answers",
        RUNS - unsolvable
    );
    if false_yes == 0 && unsolvable > 0 && unsolvable < RUNS {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_completeness() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [9, 12] {
        let yes = par_map(1000, |i| {
            let mut g = rng(9_000_000 + 10_000 * n as u64 + i as u64);
            let h = {
                let spec = GenSpec {
                    k: 3,
                    n,
                    edge_count: 2 * n,
                    plant: true,
                    kdm: false,
                };
                generate(&mut g, spec)
            }
            .unwrap();
            let cfg = SieveConfig {
                seed: g.random(),
                epsilon: 2f64.powi(-20),
                ..SieveConfig::default()
            };
            solve_xkc(&h, &cfg).unwrap().is_yes()
        })
        .into_iter()
        .filter(|&y| y)
        .count();
        ok &= yes >= 999;
        parts.push(format!("n={n}: {yes}/1000 yes"));
    }
    if ok {
        Ok(parts.join(", "))
    } else {
        Err(parts.join(", "))
    }
}

fn c10_probe_counts() -> Outcome {
    let mut got = Vec::new();
    for (j, n) in [6usize, 9, 12, 15].into_iter().enumerate() {
        let mut g = rng(10_000 + j as u64);
        let h = {
            let spec = GenSpec {
                k: 3,
                n,
                edge_count: 2 * n,
                plant: true,
                kdm: true,
            };
            generate(&mut g, spec)
        }
        .unwrap();
        let d = solve_kdm(&h, &SieveConfig::default()).unwrap();
        got.push(d.probes);
    }
    let msg = format!("probes {got:?}");
    if got == [4, 8, 16, 32] {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c11_determinism() -> Outcome {
    let field = FieldSpec::gf64();
    let mut bad = 0;
    for i in 0..50u64 {
        let mut g = rng(11_000 + i);
        if i % 2 == 0 {
            let n = 3 * g.random_range(2..=5);
            let h = {
                let spec = GenSpec {
                    k: 3,
                    n,
                    edge_count: 2 * n,
                    plant: g.random_bool(0.5),
                    kdm: true,
                };
                generate(&mut g, spec)
            }
            .unwrap();
            let r = EdgeAssignment::random(&field, &mut g, h.num_edges());
            let sums: Vec<_> = [1, 4, 8]
                .iter()
                .map(|&t| kdm_sieve(&field, &h, &r, t).unwrap())
                .collect();
            bad += usize::from(sums.windows(2).any(|w| w[0] != w[1]));
        } else {
            let k = g.random_range(3..=4);
            let n = k * g.random_range(2..=14 / k);
            let h = {
                let spec = GenSpec {
                    k,
                    n,
                    edge_count: 2 * n,
                    plant: g.random_bool(0.5),
                    kdm: false,
                };
                generate(&mut g, spec)
            }
            .unwrap();
            let mut verts: Vec<usize> = (0..n).collect();
            verts.shuffle(&mut g);
            let u = &verts[..g.random_range(1..=n.min(6))];
            let mask = h.vertex_mask(u).unwrap();
            let (h_u, _) = h.retain_edges(|id, _| h.meet_count(id, &mask) <= 2);
            let r = EdgeAssignment::random(&field, &mut g, h_u.num_edges());
            let sums: Vec<_> = [1, 4, 8]
                .iter()
                .map(|&t| sieve_decide_parallel(&field, &h_u, u, &r, t).unwrap())
                .collect();
            bad += usize::from(sums.windows(2).any(|w| w[0] != w[1]));
        }
    }
    let msg = format!("50 instances x {{1, 4, 8}} workers, {bad} differing sums");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Shift-and-reduce multiplication.
fn shift_reduce_mul(m: u32, reduction: u64, mut a: u64, mut b: u64) -> u64 {
    let top = 1u64 << (m - 1);
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        let carry = a & top != 0;
        a = (a << 1) & mask;
        if carry {
            a ^= reduction;
        }
    }
    acc
}

fn c12_field_axioms() -> Outcome {
    let mut failures = Vec::new();
    for field in [FieldSpec::gf8(), FieldSpec::gf64()] {
        let mut g = rng(12_000 + field.m() as u64);
        for trial in 0..10_000 {
            let (a, b, c) = (
                field.sample(&mut g),
                field.sample(&mut g),
                field.sample(&mut g),
            );
            let mul = |x, y| field.mul(x, y);
            let checks = [
                mul(a, b) == mul(b, a),
                mul(mul(a, b), c) == mul(a, mul(b, c)),
                mul(a, field.add(b, c)) == field.add(mul(a, b), mul(a, c)),
                field.add(field.add(a, b), c) == field.add(a, field.add(b, c)),
                field.add(a, a).is_zero(),
                mul(a, field.one()) == a,
                mul(a, field.zero()).is_zero(),
                a.is_zero() || mul(a, field.inv(a).unwrap()) == field.one(),
                mul(a, b).bits()
                    == shift_reduce_mul(field.m(), field.reduction(), a.bits(), b.bits()),
            ];
            if let Some(idx) = checks.iter().position(|ok| !ok) {
                failures.push(format!("m={} trial {trial} check {idx}", field.m()));
                break;
            }
        }
    }
    let f8 = FieldSpec::gf8();
    let mut exhaustive_bad = 0;
    for a in 0..256u64 {
        for b in 0..256u64 {
            if f8.mul(f8.elem(a), f8.elem(b)).bits() != shift_reduce_mul(8, 0x1B, a, b) {
                exhaustive_bad += 1;
            }
        }
    }
    let msg = format!(
        "2 x 10^4 trials, {} failing fields, {exhaustive_bad}/65536 exhaustive mismatches",
        failures.len()
    );
    if failures.is_empty() && exhaustive_bad == 0 {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", failures.join(", ")))
    }
}

fn main() -> ExitCode {
    // libtest passes flags such as --nocapture; this target ignores them
    let criteria: [Criterion; 12] = [
        ("optimized parameters per k", c1_optimizer),
        ("kDM runtime bases", c2_kdm_bases),
        ("general bound constant", c3_general_bound),
        ("c_k = 2^(1-t) I^(1/n)", c4_identity),
        (
            "Edmonds and Tutte determinant identities",
            c5_determinant_identities,
        ),
        ("W2f evaluation vs symbolic sum", c6_w2f),
        ("DLX vs inclusion-exclusion counts", c7_oracles),
        ("solver soundness", c8_soundness),
        ("solver completeness on planted instances", c9_completeness),
        ("kDM probe counts", c10_probe_counts),
        ("parallel determinism", c11_determinism),
        ("field axioms", c12_field_axioms),
    ];
    let mut failed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.2}s]", idx + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail} [{secs:.2}s]", idx + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
