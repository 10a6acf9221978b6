//! Exit criteria. Runs without the libtest harness so every criterion prints
//! exactly one line, in order, and the process fails if any of them does.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use dimer_core::enumeration::{brute_winding_table, enumerate_matchings, superimpose, winding_by_counts, winding_by_loops};
use dimer_core::kasteleyn::extended::{digits_to_bits, exact_partition_count, extract_winding_counts, mgf_extended};
use dimer_core::limitlaw::{convergence_report, theorem4_ratio, ConvergenceOptions};
use dimer_core::spectral::{corollary_check, free_energy, prop18_residuals, Corollary, FreeEnergyMethod};
use dimer_core::verify::{self, finite_free_energy, strictly_decreasing, Suite};
use dimer_core::{TorusGraph, WindingTable};
use rug::Float;
use serde_json::Value;

const SMALL_SIZES: [(usize, usize); 6] = [(1, 3), (1, 6), (2, 3), (2, 6), (3, 3), (3, 6)];
const TREND: [usize; 3] = [4, 8, 16];
const EXTENDED_DIGITS: u32 = 50;

type Outcome = Result<String, String>;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fmt_seq(seq: &[f64]) -> String {
    let parts: Vec<String> = seq.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn exact_counts() -> Outcome {
    let start = Instant::now();
    for (m, n) in SMALL_SIZES {
        let g = TorusGraph::build(m, n).map_err(|e| e.to_string())?;
        let brute = brute_winding_table(&g).map_err(|e| e.to_string())?;
        let exact = exact_partition_count(m, n, EXTENDED_DIGITS).map_err(|e| e.to_string())?;
        ensure(brute.total() == exact, || format!("({m},{n}): {} matchings, product gives {exact}", brute.total()))?;
        let dft = extract_winding_counts(m, n, EXTENDED_DIGITS).map_err(|e| e.to_string())?;
        ensure(brute == dft, || format!("({m},{n}): enumerated and extracted tables differ"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!("6 sizes, {:.1}s", t.as_secs_f64()))
}

fn winding_formulas() -> Outcome {
    let mut checked = 0usize;
    for (m, n) in SMALL_SIZES {
        let g = TorusGraph::build(m, n).map_err(|e| e.to_string())?;
        let m0 = g.reference_matching().map_err(|e| e.to_string())?;
        for mt in enumerate_matchings(&g).map_err(|e| e.to_string())? {
            let loops = winding_by_loops(&superimpose(&g, &mt, &m0).map_err(|e| e.to_string())?);
            let counts = winding_by_counts(&mt, &g).map_err(|e| e.to_string())?;
            ensure(loops == counts, || format!("({m},{n}): loops give {loops:?}, counts give {counts:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} matchings, zero exceptions"))
}

fn mgf_identity() -> Outcome {
    let grid = [-0.5, 0.0, 0.5];
    let bits = digits_to_bits(EXTENDED_DIGITS);
    let mut worst: f64 = 0.0;
    for (m, n) in [(1, 3), (2, 3), (2, 6)] {
        let g = TorusGraph::build(m, n).map_err(|e| e.to_string())?;
        let table = brute_winding_table(&g).map_err(|e| e.to_string())?;
        for a in grid {
            for b in grid {
                let lhs = mgf_extended(a, b, m, n, EXTENDED_DIGITS).map_err(|e| e.to_string())?;
                let rhs = table.mgf_extended(a, b, bits);
                let rel = Float::with_val(bits, (lhs - &rhs) / &rhs).abs().to_f64();
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst < 1e-10, || format!("max relative gap {worst:.3e}"))?;
    Ok(format!("max relative gap {worst:.3e}"))
}

fn suite_outcome(suite: Suite) -> Outcome {
    let start = Instant::now();
    let checks = verify::run(suite).map_err(|e| e.to_string())?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} (residual {:.3e})", c.check_name, c.residual))
        .collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} checks, {:.2}s", checks.len(), start.elapsed().as_secs_f64()))
}

fn free_energy_agreement() -> Outcome {
    let vals = FreeEnergyMethod::ALL
        .iter()
        .map(|&m| free_energy(m, 1e-11).map(|f| f.value))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let spread = vals.iter().fold(0.0f64, |s, v| s.max((v - vals[0]).abs()));
    ensure(spread < 1e-8, || format!("methods differ by {spread:.3e}"))?;
    let errs = [2, 4, 8]
        .iter()
        .map(|&k| finite_free_energy(k).map(|x| (x - vals[0]).abs()))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    ensure(strictly_decreasing(&errs), || format!("finite-size errors {}", fmt_seq(&errs)))?;
    Ok(format!("f = {:.15}, spread {spread:.1e}, finite-size errors {}", vals[0], fmt_seq(&errs)))
}

fn corollaries_and_prop18() -> Outcome {
    let mut problems = Vec::new();
    let mut ok_lines = 0;
    for (a, b) in [(0.0, 0.0), (0.5, -0.5)] {
        for which in Corollary::ALL {
            let checks = TREND
                .iter()
                .map(|&k| corollary_check(which, a, b, k, 3 * k))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            if which == Corollary::C00 && a == 0.0 && b == 0.0 {
                let zero = checks.iter().all(|c| c.finite.norm() == 0.0 && c.limit.norm() == 0.0);
                if !zero {
                    problems.push("degenerate corollary00 at the origin is not exactly zero on both sides".to_string());
                }
                continue;
            }
            let lr: Vec<f64> = checks.iter().map(|c| c.log_ratio().unwrap_or(f64::INFINITY)).collect();
            if strictly_decreasing(&lr) && lr.iter().all(|x| x.is_finite()) {
                ok_lines += 1;
            } else {
                problems.push(format!("corollary{} at ({a},{b}): |log ratio| {}", which.label(), fmt_seq(&lr)));
            }
        }
    }
    let f = free_energy(FreeEnergyMethod::LogR1Integral, 1e-13).map_err(|e| e.to_string())?.value;
    let res = TREND
        .iter()
        .map(|&k| prop18_residuals(0.5, k, 3 * k, f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let parts: [Vec<f64>; 3] = [
        res.iter().map(|r| r.part1).collect(),
        res.iter().map(|r| r.part2).collect(),
        res.iter().map(|r| r.part3).collect(),
    ];
    for (i, p) in parts.iter().enumerate() {
        if !strictly_decreasing(p) {
            problems.push(format!("part {} residuals {}", i + 1, fmt_seq(p)));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    Ok(format!("{ok_lines} corollary trends, degenerate case exact, three residual trends"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn read_table(name: &str, m: usize, n: usize) -> Result<WindingTable, String> {
    let text = std::fs::read_to_string(golden(name)).map_err(|e| e.to_string())?;
    WindingTable::from_csv(m, n, &text).map_err(|e| e.to_string())
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let sizes = [(2, 6), (4, 12), (8, 24)];
    let report = convergence_report(3f64.sqrt(), &sizes, &ConvergenceOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    let tv: Vec<f64> = report.entries.iter().map(|e| e.tv).collect();
    let gap: Vec<f64> = report.entries.iter().map(|e| e.mgf_gap_max).collect();
    ensure(strictly_decreasing(&tv), || format!("TV {}", fmt_seq(&tv)))?;
    ensure(strictly_decreasing(&gap), || format!("MGF gap {}", fmt_seq(&gap)))?;

    let text = std::fs::read_to_string(golden("convergence_rho_sqrt3.json")).map_err(|e| e.to_string())?;
    let want: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let got = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    for (g, w) in got["entries"].as_array().unwrap().iter().zip(want["entries"].as_array().unwrap()) {
        ensure(g["total"] == w["total"], || format!("total {} != golden {}", g["total"], w["total"]))?;
        for key in ["tv", "mgf_gap_max", "theorem4_ratio"] {
            let (x, y) = (g[key].as_f64().unwrap(), w[key].as_f64().unwrap());
            ensure(close(x, y), || format!("({},{}) {key} = {x} drifted from golden {y}", g["m"], g["n"]))?;
        }
    }
    ensure(report.tables[1] == read_table("winding_m4_n12.csv", 4, 12)?, || "(4,12) table differs from golden".into())?;
    ensure(report.tables[2] == read_table("winding_m8_n24.csv", 8, 24)?, || "(8,24) table differs from golden".into())?;
    Ok(format!("TV {}, MGF gap {}, {:.1}s", fmt_seq(&tv), fmt_seq(&gap), elapsed.as_secs_f64()))
}

fn theorem4() -> Outcome {
    let f = free_energy(FreeEnergyMethod::LogR1Integral, 1e-13).map_err(|e| e.to_string())?.value;
    let mut lines = Vec::new();
    for (a, b) in [(0.0, 0.0), (0.5, -0.5)] {
        let ratios = TREND
            .iter()
            .map(|&k| theorem4_ratio(a, b, k, 3 * k, f))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?;
        let dev: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
        ensure(dev[2] < 0.1, || format!("({a},{b}): ratio {} at k = 16", ratios[2]))?;
        ensure(strictly_decreasing(&dev), || format!("({a},{b}): ratios {}", fmt_seq(&ratios)))?;
        lines.push(format!("({a},{b}) {}", fmt_seq(&ratios)));
    }
    Ok(lines.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact count equivalence", exact_counts),
        ("winding formula equivalence", winding_formulas),
        ("generating function identity", mgf_identity),
        ("theta suite", || suite_outcome(Suite::Theta)),
        ("roots suite", || suite_outcome(Suite::Roots)),
        ("free energy", free_energy_agreement),
        ("finite-size corollaries and bulk residuals", corollaries_and_prop18),
        ("convergence to the discrete Gaussian", convergence),
        ("partition function asymptotics", theorem4),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", p.downcast_ref::<String>().cloned().unwrap_or_default())));
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
