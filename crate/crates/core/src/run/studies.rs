use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ConvergenceConfig, ExtractionConfig, MellinLoopConfig, TailConfig};
use crate::asympt::{
    fit_front_face, fit_tail_decay, locate_poles, mellin, sigma_line, ExpansionFit, FitOptions, MellinCutoff,
    PoleOptions, TailFit,
};
use crate::coords::phg_value;
use crate::indexsets::{parse_entry, resonance_sets, Exponent, IndexEntry, IndexSet};
use crate::numerics::halton::halton;
use crate::solver::{
    exact_minkowski_oracle, extract_null_slices, plan_null_slices, reduce_radial, solve_forward, GridSpec, NullSlice,
    ProbePoint, SolutionGrid, SourceSpec,
};
use crate::Result;

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub dr: f64,
    pub max_abs_error: f64,
    pub rel_error: f64,
    /// `log2` of the error ratio to the previous (coarser) row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub t_eval: f64,
    pub points: usize,
    pub rows: Vec<ConvergenceRow>,
    pub min_order: f64,
    pub finest_rel_error: f64,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dr,max_abs_error,rel_error,order\n");
        for r in &self.rows {
            let o = r.order.map_or("nan".to_string(), |o| format!("{o:.6}"));
            s.push_str(&format!("{:.10e},{:.6e},{:.6e},{o}\n", r.dr, r.max_abs_error, r.rel_error));
        }
        s
    }
}

/// Relative max-norm error of `u` on Minkowski at `t_eval` against the exact
/// solution, for each grid spacing.
pub fn convergence_study(source: &SourceSpec, cfg: &ConvergenceConfig) -> Result<ConvergenceStudy> {
    let model = reduce_radial(0.0)?;
    let n = (cfg.r_max / cfg.r_step + 1e-9).floor() as usize;
    let pts: Vec<(f64, f64)> = (1..=n).map(|i| (cfg.t_eval, cfg.r_step * i as f64)).collect();
    let exact = exact_minkowski_oracle(source, &pts)?;
    let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let probes: Vec<ProbePoint> = pts.iter().map(|&(t, r)| ProbePoint { t, r_star: r }).collect();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &dr in &cfg.drs {
        let grid = GridSpec { dr, t_end: 0.0, ..GridSpec::default() };
        let sol = solve_forward(&model, source, &grid, &probes)?;
        let err = sol
            .probe_psi
            .iter()
            .zip(&pts)
            .zip(&exact)
            .fold(0.0f64, |m, ((psi, (_, r)), u)| m.max((psi / r - u).abs()));
        // Undefined when both grids reproduce the exact solution exactly.
        let order = rows
            .last()
            .filter(|p| p.max_abs_error > 0.0 || err > 0.0)
            .map(|p| (p.max_abs_error / err).log2() / (p.dr / dr).log2());
        rows.push(ConvergenceRow { dr, max_abs_error: err, rel_error: err / scale, order });
    }
    let min_order = rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min);
    let finest_rel_error = rows.last().map_or(f64::NAN, |r| r.rel_error);
    Ok(ConvergenceStudy { t_eval: cfg.t_eval, points: pts.len(), rows, min_order, finest_rel_error })
}

/// One evolution, its null slices and the front-face fit.
#[derive(Clone, Debug)]
pub struct FrontFaceStudy {
    pub mass: f64,
    pub dr: f64,
    pub chart: String,
    pub solution: SolutionGrid,
    pub slices: Vec<NullSlice>,
    pub fit: ExpansionFit,
}

/// Evolve and extract slices for `extraction`. With `frames > 0` about that
/// many snapshots are kept for checkpointing.
pub fn solve_slices(
    mass: f64,
    source: &SourceSpec,
    grid: &GridSpec,
    extraction: &ExtractionConfig,
    frames: usize,
) -> Result<(SolutionGrid, Vec<NullSlice>)> {
    let model = reduce_radial(mass)?;
    let mut grid = grid.clone();
    let plan = plan_null_slices(&model, source, &grid, extraction.chart, &extraction.s_values(), &extraction.schedule())?;
    if frames > 0 {
        let (t_start, _) = source.t_support();
        let levels = ((plan.t_max().max(grid.t_end) - t_start) / grid.dt()).ceil().max(1.0) as usize;
        grid.frame_every = (levels / frames).max(1);
    }
    let solution = solve_forward(&model, source, &grid, &plan.probes())?;
    let slices = extract_null_slices(&solution, &plan)?;
    Ok((solution, slices))
}

/// [`solve_slices`] followed by the front-face fit.
pub fn front_face_study(
    mass: f64,
    source: &SourceSpec,
    grid: &GridSpec,
    extraction: &ExtractionConfig,
    fit: &FitOptions,
    frames: usize,
) -> Result<FrontFaceStudy> {
    let (solution, slices) = solve_slices(mass, source, grid, extraction, frames)?;
    let fit = fit_front_face(&slices, fit)?;
    Ok(FrontFaceStudy { mass, dr: grid.dr, chart: extraction.chart.label(), solution, slices, fit })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailStudy {
    pub mass: f64,
    pub s: Vec<f64>,
    pub w0: Vec<f64>,
    pub max_abs_w0: f64,
    /// `None` when the window is tail-free (`max |w0|` below the floor).
    pub fit: Option<TailFit>,
    /// The same window on Minkowski.
    pub minkowski_max_abs_w0: f64,
    pub floor: f64,
    /// A tail is seen for `m != 0` and none for `m = 0`.
    pub contrast: bool,
}

/// Late-time behaviour of `w0(s)` on tortoise slices, with the Minkowski run
/// as the short-range contrast.
pub fn tail_study(source: &SourceSpec, cfg: &TailConfig) -> Result<TailStudy> {
    let grid = GridSpec { dr: cfg.dr, t_end: 0.0, ..GridSpec::default() };
    let ext = cfg.extraction();
    let opts = cfg.fit_options();
    let w0_of = |mass: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let st = front_face_study(mass, source, &grid, &ext, &opts, 0)?;
        Ok((st.fit.s, st.fit.w0))
    };
    let (s, w0) = w0_of(cfg.mass)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_abs_w0 = max_abs(&w0);
    let fit = if max_abs_w0 > cfg.floor && cfg.mass > 0.0 { Some(fit_tail_decay(&s, &w0, &cfg.options)?) } else { None };
    let (_, w0_flat) = w0_of(0.0)?;
    let minkowski_max_abs_w0 = max_abs(&w0_flat);
    let contrast = fit.is_some() && minkowski_max_abs_w0 <= cfg.floor;
    Ok(TailStudy { mass: cfg.mass, s, w0, max_abs_w0, fit, minkowski_max_abs_w0, floor: cfg.floor, contrast })
}

#[derive(Clone, Debug, Serialize)]
pub struct MellinCase {
    /// Planted `(re z, im z, k)`.
    pub planted: Vec<(f64, f64, u32)>,
    /// Recovered `(re, im, order)`.
    pub found: Vec<(f64, f64, usize)>,
    pub max_location_error: f64,
    pub orders_exact: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MellinLoopReport {
    pub cases: Vec<MellinCase>,
    pub worst_location_error: f64,
    pub failures: usize,
}

/// Random exponents with `Im z` in `[-1.4, -0.5)`, `|Re z| <= 2`, pairwise
/// separation at least 0.3 and at most 5 entries counting log powers.
fn random_exponents(seed: u64, case: u64) -> Vec<(f64, f64, u32)> {
    let mut zs: Vec<(f64, f64, u32)> = Vec::new();
    let base = (seed % 1000) * 10_000 + case * 50 + 1;
    let target = 1 + (halton(base, 1)[0] * 5.0) as usize;
    let mut idx = base;
    let mut total = 0;
    while total < target {
        let h = halton(idx, 4);
        idx += 1;
        let (re, im) = (-2.0 + 4.0 * h[0], -1.4 + 0.9 * h[1]);
        if zs.iter().any(|&(a, b, _)| (a - re).hypot(b - im) < 0.3) {
            continue;
        }
        let k = ((h[2] * 3.0) as u32).min((target - total - 1) as u32);
        total += k as usize + 1;
        zs.push((re, im, k));
    }
    zs
}

/// Synthesize a polyhomogeneous function from a random index set, take its
/// Mellin transform on three horizontal lines and locate the poles.
pub fn mellin_oracle_loop(cfg: &MellinLoopConfig, seed: u64) -> Result<MellinLoopReport> {
    let mut cases = Vec::with_capacity(cfg.cases);
    for case in 0..cfg.cases as u64 {
        let zs = random_exponents(seed, case);
        let e = IndexSet::from_entries(zs.iter().map(|&(a, b, k)| IndexEntry::new(Exponent::from_f64(a, b), k)), 1.5);
        let one = |_: &IndexEntry, _: f64| Complex64::new(1.0, 0.0);
        let f = |rho: f64| phg_value(&e, &one, rho, 0.0);
        let lines = [0.0, 0.4, 0.8]
            .iter()
            .map(|&im| mellin(f, MellinCutoff::default(), &sigma_line(im, -4.0, 4.0, 81), 1e-13))
            .collect::<Result<Vec<_>>>()?;
        let rep = locate_poles(&lines, &PoleOptions::default())?;
        let mut err = 0.0f64;
        let mut orders = rep.poles.len() == zs.len();
        for &(a, b, k) in &zs {
            let z = Complex64::new(a, b);
            match rep.poles.iter().min_by(|p, q| (p.location - z).norm().total_cmp(&(q.location - z).norm())) {
                Some(p) => {
                    err = err.max((p.location - z).norm());
                    orders &= p.order == k as usize + 1;
                }
                None => {
                    err = f64::INFINITY;
                    orders = false;
                }
            }
        }
        let found = rep.poles.iter().map(|p| (p.location.re, p.location.im, p.order)).collect();
        let passed = orders && err <= cfg.location_tol;
        cases.push(MellinCase { planted: zs, found, max_location_error: err, orders_exact: orders, passed });
    }
    let worst_location_error = cases.iter().fold(0.0f64, |m, c| m.max(c.max_location_error));
    let failures = cases.iter().filter(|c| !c.passed).count();
    Ok(MellinLoopReport { cases, worst_location_error, failures })
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexPropertyReport {
    pub sets: usize,
    pub commutativity_failures: usize,
    pub associativity_failures: usize,
    pub logify_smooth_exact: bool,
    pub resonance_example_exact: bool,
}

impl IndexPropertyReport {
    pub fn passed(&self) -> bool {
        self.commutativity_failures == 0
            && self.associativity_failures == 0
            && self.logify_smooth_exact
            && self.resonance_example_exact
    }
}

fn exact(re: i64, im: i64) -> Exponent {
    Exponent::exact(Rational64::from_integer(re), Rational64::from_integer(im))
}

fn random_set(rng: &mut ChaCha8Rng, depth: f64) -> IndexSet {
    let n = rng.random_range(0..=4);
    let items: Vec<IndexEntry> = (0..n)
        .map(|_| {
            let re = Rational64::new(rng.random_range(-2..=2), 2);
            let im = Rational64::new(-rng.random_range(0..=6), 2);
            IndexEntry::new(Exponent::exact(re, im), rng.random_range(0..=2))
        })
        .collect();
    IndexSet::from_entries(items, depth)
}

/// Algebraic identities on `sets` random small index sets plus the fixed
/// logification and resonance examples.
pub fn index_property_suite(sets: usize, seed: u64) -> Result<IndexPropertyReport> {
    let depth = 3.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<IndexSet> = (0..sets).map(|_| random_set(&mut rng, depth)).collect();
    let (mut comm, mut assoc) = (0, 0);
    for i in 0..pool.len() {
        let (a, b, c) = (&pool[i], &pool[(i + 1) % pool.len()], &pool[(i + 2) % pool.len()]);
        if !a.extended_union(b)?.same_as(&b.extended_union(a)?) {
            comm += 1;
        }
        let l = a.extended_union(b)?.extended_union(c)?;
        let r = a.extended_union(&b.extended_union(c)?)?;
        if !l.same_as(&r) {
            assoc += 1;
        }
    }

    // logify of the smooth set: (-i n, j) for j = 0 ..= n.
    let triangle = |d: f64| {
        let n_max = (d - 1e-9).ceil() as i64 - 1;
        let items = (0..=n_max).flat_map(|n| (0..=n as u32).map(move |j| IndexEntry::new(exact(0, -n), j)));
        IndexSet::from_entries(items, d)
    };
    let logify_smooth_exact =
        [0.5, 1.5, 2.5, 3.5, 6.5].iter().all(|&d| IndexSet::smooth(d).logify().same_as(&triangle(d)));

    let e0 = [IndexEntry::new(exact(0, -1), 0)];
    let set = |items: &[(i64, u32)]| IndexSet::from_entries(items.iter().map(|&(im, k)| IndexEntry::new(exact(0, im), k)), depth);
    let flat = resonance_sets(&e0, false, depth);
    let long = resonance_sets(&e0, true, depth);
    let resonance_example_exact = flat.e_res0.same_as(&set(&[(-1, 0), (-2, 0), (-3, 0)]))
        && flat.e_res.same_as(&flat.e_res0)
        && flat.e_scri.same_as(&IndexSet::smooth(depth))
        && long.e_res.same_as(&set(&[(-1, 0), (-2, 1), (-3, 2)]))
        && long.e_scri.same_as(&set(&[(0, 0), (-1, 2), (-2, 4), (-3, 6)]));

    Ok(IndexPropertyReport {
        sets,
        commutativity_failures: comm,
        associativity_failures: assoc,
        logify_smooth_exact,
        resonance_example_exact,
    })
}

/// Parse `re,im,k` strings.
pub fn parse_e0(items: &[String]) -> Result<Vec<IndexEntry>> {
    items.iter().map(|s| parse_entry(s)).collect()
}
