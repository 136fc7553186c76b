use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::RadialModel;
use super::source::SourceSpec;
use crate::numerics::interp::lagrange4_weights;
use crate::{Error, Result};

/// Point at which the solution is sampled during the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub t: f64,
    pub r_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Spacing in `r*`.
    pub dr: f64,
    /// `dt / dr`; at most 1.
    pub courant: f64,
    /// Final time (the run goes further if a probe needs it).
    pub t_end: f64,
    /// Times at which full snapshots are stored (snapped to time levels).
    pub frame_times: Vec<f64>,
    /// Store a snapshot every this many levels as well (0: never). With an
    /// active moving window these cover the kept cells only.
    pub frame_every: usize,
    /// Record the discrete energy every this many steps (0: never).
    pub energy_every: usize,
    /// Drop cells on the left that no longer influence any probe. Only
    /// takes effect at Courant number 1, where domains of dependence are
    /// exactly one cell wide per step, and only without `frame_times`.
    pub moving_window: bool,
    /// Abort if `max |psi|` exceeds this.
    pub blowup_bound: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dr: 1.0 / 16.0,
            courant: 1.0,
            t_end: 40.0,
            frame_times: Vec::new(),
            frame_every: 0,
            energy_every: 0,
            moving_window: true,
            blowup_bound: 1e8,
        }
    }
}

impl GridSpec {
    pub fn dt(&self) -> f64 {
        self.courant * self.dr
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0 && self.dr.is_finite()) {
            return Err(Error::Precondition(format!("dr must be positive, got {}", self.dr)));
        }
        if !(self.courant > 0.0) {
            return Err(Error::Precondition(format!("courant number must be positive, got {}", self.courant)));
        }
        if self.courant > 1.0 {
            return Err(Error::Cfl(self.courant));
        }
        if !self.t_end.is_finite() {
            return Err(Error::Precondition("t_end must be finite".into()));
        }
        Ok(())
    }
}

/// Snapshot of `psi` on the cells `first_cell ..` at one time level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub level: usize,
    pub t: f64,
    pub first_cell: usize,
    pub psi: Vec<f64>,
}

/// Output of [`solve_forward`]: snapshots of `psi = r u` on the uniform
/// `(t, r*)` grid, probe samples and the energy history.
///
/// Cell `j` sits at `r* = r_star0 + j dr`; level `n` at `t = t_start + n dt`.
/// `psi` vanishes identically for `t <= t_start` and beyond the right edge of
/// each snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionGrid {
    pub model: RadialModel,
    pub source: SourceSpec,
    pub dr: f64,
    pub dt: f64,
    pub t_start: f64,
    pub r_star0: f64,
    pub levels: usize,
    pub frames: Vec<Frame>,
    pub probes: Vec<ProbePoint>,
    pub probe_psi: Vec<f64>,
    /// `(t, E)` at half-integer levels.
    pub energy: Vec<(f64, f64)>,
    /// Largest `t - r*` kept by the moving window (infinite when inactive).
    pub u_keep: f64,
}

impl SolutionGrid {
    pub fn time(&self, level: usize) -> f64 {
        self.t_start + level as f64 * self.dt
    }

    pub fn r_star(&self, cell: usize) -> f64 {
        self.r_star0 + cell as f64 * self.dr
    }

    pub fn frame_near(&self, t: f64) -> Option<&Frame> {
        self.frames.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// 4th-order interpolation of `psi` within a frame.
    pub fn psi_in_frame(&self, frame: &Frame, r_star: f64) -> Result<f64> {
        spatial_interp(&self.model, self.r_star0, self.dr, frame.first_cell, &frame.psi, r_star)
    }

    /// Derived fields `(psi, u, w)` of a frame at its cells, with `w = r u`.
    pub fn fields(&self, frame: &Frame) -> Result<Vec<(f64, f64, f64, f64)>> {
        frame
            .psi
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let rs = self.r_star(frame.first_cell + i);
                let r = self.model.r_of_tortoise(rs)?;
                let u = if r > 0.0 { p / r } else { f64::NAN };
                Ok((rs, p, u, r * u))
            })
            .collect()
    }

    pub fn max_abs_psi(&self) -> f64 {
        self.frames
            .iter()
            .flat_map(|f| f.psi.iter())
            .chain(self.probe_psi.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

fn node_weights(x: f64) -> (i64, [f64; 4]) {
    let k = x.round();
    if (x - k).abs() <= 1e-9 {
        return (k as i64 - 1, [0.0, 1.0, 0.0, 0.0]);
    }
    let i0 = x.floor() as i64 - 1;
    (i0, lagrange4_weights(x - i0 as f64))
}

/// Interpolate cells `first ..` of `psi` at `r_star`. Cells beyond the right
/// edge are zero; Minkowski cells left of `r = 0` use the odd reflection.
fn spatial_interp(model: &RadialModel, r_star0: f64, dr: f64, first: usize, psi: &[f64], r_star: f64) -> Result<f64> {
    let (j0, w) = node_weights((r_star - r_star0) / dr);
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        let j = j0 + k as i64;
        let value = if j < 0 {
            if !model.is_minkowski() || first != 0 {
                return Err(Error::OutsideChart(format!("r* = {r_star} is left of the inner boundary")));
            }
            -cell_value(psi, 0, (-j) as usize)?
        } else {
            cell_value(psi, first, j as usize).map_err(|_| {
                Error::OutsideChart(format!("r* = {r_star} lies outside the computed window"))
            })?
        };
        acc += wk * value;
    }
    Ok(acc)
}

fn cell_value(psi: &[f64], first: usize, j: usize) -> Result<f64> {
    if j < first {
        return Err(Error::OutsideChart(format!("cell {j} was discarded")));
    }
    Ok(psi.get(j - first).copied().unwrap_or(0.0))
}

struct ProbeState {
    index: usize,
    first_level: i64,
    weights: [f64; 4],
}

/// Second-order leapfrog for `psi_tt - psi_{r* r*} + V psi = (1 - 2M/r) r f`
/// from zero data. The potential term is averaged over the outer time levels,
/// which keeps the scheme neutrally stable at Courant number 1 for `V >= 0`.
///
/// Inner boundary: `psi = 0` at `r = 0` for Minkowski, an upwind outgoing
/// condition at `r = 3M` otherwise. The right edge advances one cell per step
/// ahead of the numerical domain of influence of the source, so no outer
/// boundary condition is ever applied.
pub fn solve_forward(model: &RadialModel, source: &SourceSpec, grid: &GridSpec, probes: &[ProbePoint]) -> Result<SolutionGrid> {
    grid.validate()?;
    source.validate()?;
    let (dr, dt) = (grid.dr, grid.dt());
    let lam = grid.courant;
    let lam2 = lam * lam;
    let dt2 = dt * dt;
    let (t_start, t_src_end) = source.t_support();
    let r_star0 = if model.is_minkowski() { 0.0 } else { model.r_star_inner() };
    let (r_lo, r_hi) = source.r_support();
    if !model.is_minkowski() && r_lo <= model.r_inner() {
        return Err(Error::Precondition(format!(
            "source support starts at r = {r_lo}, inside the inner boundary r = {}",
            model.r_inner()
        )));
    }
    let level_of = |t: f64| ((t - t_start) / dt).round().max(0.0) as usize;

    let mut states: Vec<ProbeState> = Vec::with_capacity(probes.len());
    let mut last_level = ((grid.t_end - t_start) / dt).ceil().max(1.0) as i64;
    for (index, p) in probes.iter().enumerate() {
        if !(p.t.is_finite() && p.r_star.is_finite()) {
            return Err(Error::Precondition(format!("probe {index} is not finite")));
        }
        if p.r_star < r_star0 - 1e-12 {
            return Err(Error::OutsideChart(format!("probe r* = {} is left of the inner boundary", p.r_star)));
        }
        let (first_level, weights) = node_weights((p.t - t_start) / dt);
        last_level = last_level.max(first_level + 3);
        states.push(ProbeState { index, first_level, weights });
    }
    states.sort_by_key(|s| s.first_level);
    let frame_levels: Vec<usize> = grid.frame_times.iter().map(|&t| level_of(t)).collect();
    if let Some(&l) = frame_levels.iter().max() {
        last_level = last_level.max(l as i64);
    }
    let last_level = last_level as usize;

    let u_keep = if grid.moving_window && lam == 1.0 && !probes.is_empty() && grid.frame_times.is_empty() {
        probes.iter().map(|p| p.t - p.r_star).fold(f64::NEG_INFINITY, f64::max) + 6.0 * dr
    } else {
        f64::INFINITY
    };

    let r_star_hi = model.tortoise(r_hi)?;
    let mut w = Window::new(model, source, r_star0, dr);
    w.extend_to(((r_star_hi - r_star0) / dr).ceil() as usize + 3)?;

    let mut probe_psi = vec![0.0; probes.len()];
    let mut next_probe = 0;
    let mut active: Vec<usize> = Vec::new();
    let mut frames = Vec::new();
    let mut energy = Vec::new();
    let bound = grid.blowup_bound;
    let mut trimming = false;

    for n in 0..=last_level {
        let t_n = t_start + n as f64 * dt;
        // Level n is in `cur`.
        if frame_levels.contains(&n) || (grid.frame_every > 0 && n % grid.frame_every == 0) {
            frames.push(Frame { level: n, t: t_n, first_cell: w.lo, psi: w.cur[w.lo - w.base..w.hi - w.base].to_vec() });
        }
        while next_probe < states.len() && states[next_probe].first_level <= n as i64 {
            active.push(next_probe);
            next_probe += 1;
        }
        let mut done = Vec::new();
        for (slot, &si) in active.iter().enumerate() {
            let st = &states[si];
            let k = (n as i64 - st.first_level) as usize;
            if k < 4 && st.weights[k] != 0.0 {
                let p = probes[st.index];
                let v = spatial_interp(model, r_star0, dr, w.lo, &w.cur[w.lo - w.base..w.hi - w.base], p.r_star)?;
                probe_psi[st.index] += st.weights[k] * v;
            }
            if k >= 3 {
                done.push(slot);
            }
        }
        for slot in done.into_iter().rev() {
            active.swap_remove(slot);
        }
        if n == last_level {
            break;
        }
        if n % 256 == 0 {
            let m = w.cur[w.lo - w.base..w.hi - w.base].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !(m <= bound) {
                return Err(Error::Unstable(format!("max |psi| = {m:e} at t = {t_n}")));
            }
        }

        // Cells whose future no longer reaches any probe.
        trimming = trimming || t_n + dt - (r_star0 + w.lo as f64 * dr) > u_keep;
        let trim = trimming;
        w.extend_to(w.hi + 1)?;
        let tp = if t_n <= t_src_end { source.amplitude * source.time_profile(t_n) } else { 0.0 };
        w.step(lam, lam2, dt2, tp, trim, model.is_minkowski());
        if grid.energy_every > 0 && n % grid.energy_every == 0 {
            energy.push((t_n + 0.5 * dt, w.energy(dt, dr)));
        }
        w.rotate();
        if trim {
            w.lo += 1;
            w.compact();
        }
    }

    Ok(SolutionGrid {
        model: *model,
        source: *source,
        dr,
        dt,
        t_start,
        r_star0,
        levels: last_level + 1,
        frames,
        probes: probes.to_vec(),
        probe_psi,
        energy,
        u_keep,
    })
}

/// Active cells `lo .. hi` (absolute indices) stored from `base`.
struct Window<'a> {
    model: &'a RadialModel,
    source: &'a SourceSpec,
    r_star0: f64,
    dr: f64,
    base: usize,
    lo: usize,
    hi: usize,
    old: Vec<f64>,
    cur: Vec<f64>,
    new: Vec<f64>,
    pot: Vec<f64>,
    src: Vec<f64>,
    src_cells: (usize, usize),
}

impl<'a> Window<'a> {
    fn new(model: &'a RadialModel, source: &'a SourceSpec, r_star0: f64, dr: f64) -> Self {
        Window {
            model,
            source,
            r_star0,
            dr,
            base: 0,
            lo: 0,
            hi: 0,
            old: Vec::new(),
            cur: Vec::new(),
            new: Vec::new(),
            pot: Vec::new(),
            src: Vec::new(),
            src_cells: (usize::MAX, 0),
        }
    }

    fn extend_to(&mut self, hi: usize) -> Result<()> {
        while self.hi < hi {
            let j = self.hi;
            let rs = self.r_star0 + j as f64 * self.dr;
            let r = self.model.r_of_tortoise(rs)?;
            let f = self.model.lapse(r) * r * self.source.radial_profile(r);
            if f != 0.0 {
                self.src_cells = (self.src_cells.0.min(j), self.src_cells.1.max(j + 1));
            }
            self.old.push(0.0);
            self.cur.push(0.0);
            self.new.push(0.0);
            self.pot.push(if self.model.is_minkowski() { 0.0 } else { self.model.potential(r) });
            self.src.push(f);
            self.hi += 1;
        }
        Ok(())
    }

    fn step(&mut self, lam: f64, lam2: f64, dt2: f64, tp: f64, trim: bool, minkowski: bool) {
        let (lo, hi) = (self.lo - self.base, self.hi - self.base);
        let old = &self.old[..hi];
        let cur = &self.cur[..hi];
        let pot = &self.pot[..hi];
        let interior = lo + 1;
        let update = |k: usize, out: &mut f64| {
            let right = if k + 1 < hi { cur[k + 1] } else { 0.0 };
            let a = 0.5 * dt2 * pot[k];
            let lap = if lam == 1.0 { right + cur[k - 1] } else { lam2 * (right + cur[k - 1]) + 2.0 * (1.0 - lam2) * cur[k] };
            *out = if a == 0.0 { lap - old[k] } else { lap / (1.0 + a) - old[k] };
        };
        let new = &mut self.new[interior..hi];
        if new.len() > 1 << 15 {
            new.par_iter_mut().enumerate().for_each(|(i, out)| update(interior + i, out));
        } else {
            for (i, out) in new.iter_mut().enumerate() {
                update(interior + i, out);
            }
        }
        if !trim {
            // Boundary cell, still at the inner boundary.
            self.new[lo] = if minkowski { 0.0 } else { cur[lo] + lam * (cur[lo + 1] - cur[lo]) };
        }
        if tp != 0.0 {
            let (a, b) = self.src_cells;
            for j in a.max(self.lo + 1)..b.min(self.hi) {
                let k = j - self.base;
                let scale = 1.0 + 0.5 * dt2 * self.pot[k];
                self.new[k] += dt2 * tp * self.src[k] / scale;
            }
        }
    }

    /// Energy between the levels in `cur` (older) and `new`.
    fn energy(&self, dt: f64, dr: f64) -> f64 {
        let (lo, hi) = (self.lo - self.base, self.hi - self.base);
        let mut e = 0.0;
        for k in lo..hi {
            let (c, n1) = (self.cur[k], self.new[k]);
            let (c1, n11) = if k + 1 < hi { (self.cur[k + 1], self.new[k + 1]) } else { (0.0, 0.0) };
            let dtp = (n1 - c) / dt;
            e += 0.5 * dtp * dtp + 0.5 * (n11 - n1) * (c1 - c) / (dr * dr) + 0.25 * self.pot[k] * (n1 * n1 + c * c);
        }
        e * dr
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.old, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.new);
    }

    fn compact(&mut self) {
        let gap = self.lo - self.base;
        if gap >= 1 << 14 && gap * 2 >= self.old.len() {
            for v in [&mut self.old, &mut self.cur, &mut self.new, &mut self.pot, &mut self.src] {
                v.drain(..gap);
            }
            self.base = self.lo;
        }
    }
}
