//! Position-space walk simulation in 1D and separable 2D, the overlap phase
//! between two states, and the time-multiplexed encoding of a 2D lattice
//! into photon arrival times.

mod momentum;
mod state;
mod timebins;

pub use momentum::evolve_momentum_space;
pub use state::{DenseGrid, LineState, PlaneState, SiteProbability};
pub use timebins::{
    from_time_bins, sample_shots, to_time_bins, ArrivalBin, ArrivalHistogram, CoinLabel, ShotCounts, SiteProbabilities,
    TimeBinConfig,
};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coin::{step_sequence, StepOp};
use crate::protocol::ProtocolParams;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest distance any amplitude can travel during one step.
fn step_reach(ops: &[StepOp]) -> i64 {
    ops.iter()
        .map(|op| match op {
            StepOp::Shift(s) => s.displacement().iter().map(|d| d.abs()).max().unwrap_or(0),
            StepOp::Coin(_) => 0,
        })
        .sum()
}

/// Applies `ops` to a line of coin pairs that already has enough empty
/// margin for the shifts.
fn apply_ops(ops: &[StepOp], line: &mut Vec<[C64; 2]>) {
    for op in ops {
        match op {
            StepOp::Coin(c) => line.iter_mut().for_each(|a| *a = c.apply(*a)),
            StepOp::Shift(s) => {
                let [dh, dv] = s.displacement();
                let n = line.len() as i64;
                let mut out = vec![[ZERO; 2]; line.len()];
                for (i, a) in line.iter().enumerate() {
                    let i = i as i64;
                    if a[0] != ZERO {
                        debug_assert!((0..n).contains(&(i + dh)));
                        out[(i + dh) as usize][0] = a[0];
                    }
                    if a[1] != ZERO {
                        debug_assert!((0..n).contains(&(i + dv)));
                        out[(i + dv) as usize][1] = a[1];
                    }
                }
                *line = out;
            }
        }
    }
}

/// One full protocol step of a 1D state.
pub fn step_1d(state: &LineState, params: &ProtocolParams) -> LineState {
    let ops = step_sequence(params);
    let radius = state.radius + step_reach(&ops);
    let mut amps = state.padded(radius);
    apply_ops(&ops, &mut amps);
    LineState { radius, amps, steps: state.steps + 1 }
}

fn step_dense(g: &DenseGrid, px: &ProtocolParams, py: &ProtocolParams) -> DenseGrid {
    let (ox, oy) = (step_sequence(px), step_sequence(py));
    let (rx, ry) = (g.radius_x + step_reach(&ox), g.radius_y + step_reach(&oy));
    let (wx, wy) = ((2 * rx + 1) as usize, (2 * ry + 1) as usize);
    let mut amps = vec![[ZERO; 4]; wx * wy];
    let (offx, offy) = ((rx - g.radius_x) as usize, (ry - g.radius_y) as usize);
    let old_wy = g.width_y();
    for (i, row) in g.amps.chunks(old_wy).enumerate() {
        let start = (i + offx) * wy + offy;
        amps[start..start + old_wy].copy_from_slice(row);
    }

    // x walk: for every y site and y-coin value, a line over x of
    // (x-coin H, x-coin V) pairs.
    let x_lines: Vec<(usize, usize, Vec<[C64; 2]>)> = (0..wy)
        .into_par_iter()
        .flat_map_iter(|j| (0..2).map(move |cy| (j, cy)))
        .map(|(j, cy)| {
            let mut line: Vec<[C64; 2]> = (0..wx).map(|i| [amps[i * wy + j][cy], amps[i * wy + j][2 + cy]]).collect();
            apply_ops(&ox, &mut line);
            (j, cy, line)
        })
        .collect();
    for (j, cy, line) in x_lines {
        for (i, a) in line.into_iter().enumerate() {
            amps[i * wy + j][cy] = a[0];
            amps[i * wy + j][2 + cy] = a[1];
        }
    }

    // y walk: rows are contiguous in y.
    amps.par_chunks_mut(wy).for_each(|row| {
        for cx in 0..2 {
            let mut line: Vec<[C64; 2]> = row.iter().map(|a| [a[2 * cx], a[2 * cx + 1]]).collect();
            apply_ops(&oy, &mut line);
            for (a, l) in row.iter_mut().zip(line) {
                a[2 * cx] = l[0];
                a[2 * cx + 1] = l[1];
            }
        }
    });

    DenseGrid { radius_x: rx, radius_y: ry, amps, steps: g.steps + 1 }
}

/// One separable step `U_x ⊗ U_y` of a 2D state.
pub fn step_2d(state: &PlaneState, params_x: &ProtocolParams, params_y: &ProtocolParams) -> PlaneState {
    match state {
        PlaneState::Product { x, y } => PlaneState::Product { x: step_1d(x, params_x), y: step_1d(y, params_y) },
        PlaneState::Dense(g) => PlaneState::Dense(step_dense(g, params_x, params_y)),
    }
}

/// A walk state in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkState {
    Line(LineState),
    Plane(PlaneState),
}

impl WalkState {
    pub fn steps(&self) -> usize {
        match self {
            WalkState::Line(s) => s.steps(),
            WalkState::Plane(s) => s.steps(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            WalkState::Line(s) => s.norm_sqr(),
            WalkState::Plane(s) => s.norm_sqr(),
        }
    }

    pub fn distribution(&self) -> Vec<SiteProbability> {
        match self {
            WalkState::Line(s) => {
                s.distribution().into_iter().map(|(x, p_h, p_v)| SiteProbability { x, y: None, p_h, p_v }).collect()
            }
            WalkState::Plane(s) => s.distribution(),
        }
    }
}

/// Coin parameters for each step index; lets the coin change from step to
/// step the way a switched modulator would.
pub trait Schedule: Sync {
    fn params_at(&self, step: usize) -> (ProtocolParams, Option<ProtocolParams>);
}

/// Constant parameters: `params_x` for 1D, plus `params_y` for 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub params_x: ProtocolParams,
    pub params_y: Option<ProtocolParams>,
}

impl Schedule for Constant {
    fn params_at(&self, _step: usize) -> (ProtocolParams, Option<ProtocolParams>) {
        (self.params_x, self.params_y)
    }
}

impl<F> Schedule for F
where
    F: Fn(usize) -> (ProtocolParams, Option<ProtocolParams>) + Sync,
{
    fn params_at(&self, step: usize) -> (ProtocolParams, Option<ProtocolParams>) {
        self(step)
    }
}

/// Runs `n_steps` steps of `schedule` from `initial`. A 2D state needs y
/// parameters at every step and a 1D state must not get any.
pub fn evolve_schedule(initial: &WalkState, schedule: &dyn Schedule, n_steps: usize) -> Result<WalkState> {
    let mut state = initial.clone();
    for i in 0..n_steps {
        let step = initial.steps() + i;
        state = match (&state, schedule.params_at(step)) {
            (WalkState::Line(s), (px, None)) => WalkState::Line(step_1d(s, &px)),
            (WalkState::Plane(s), (px, Some(py))) => WalkState::Plane(step_2d(s, &px, &py)),
            (WalkState::Line(_), (_, Some(_))) => {
                return Err(Error::InvalidArgument("y parameters given for a 1D walk".into()))
            }
            (WalkState::Plane(_), (_, None)) => {
                return Err(Error::InvalidArgument("2D walk needs y parameters".into()))
            }
        };
    }
    Ok(state)
}

/// `n_steps` steps with constant parameters; `params_y` selects 2D.
pub fn evolve(
    initial: &WalkState,
    params_x: &ProtocolParams,
    params_y: Option<&ProtocolParams>,
    n_steps: usize,
) -> Result<WalkState> {
    let schedule = Constant { params_x: *params_x, params_y: params_y.copied() };
    evolve_schedule(initial, &schedule, n_steps)
}

/// Inner product `⟨a|b⟩` over the union of both lattice boxes.
pub fn overlap(a: &WalkState, b: &WalkState) -> Result<C64> {
    match (a, b) {
        (WalkState::Line(a), WalkState::Line(b)) => {
            let r = a.radius().max(b.radius());
            Ok((-r..=r)
                .map(|x| {
                    let (u, v) = (a.amplitude(x), b.amplitude(x));
                    u[0].conj() * v[0] + u[1].conj() * v[1]
                })
                .sum())
        }
        (WalkState::Plane(a), WalkState::Plane(b)) => {
            let ((ax, ay), (bx, by)) = (a.radii(), b.radii());
            let (rx, ry) = (ax.max(bx), ay.max(by));
            let mut sum = ZERO;
            for x in -rx..=rx {
                for y in -ry..=ry {
                    let (u, v) = (a.amplitude(x, y), b.amplitude(x, y));
                    sum += u.iter().zip(&v).map(|(p, q)| p.conj() * q).sum::<C64>();
                }
            }
            Ok(sum)
        }
        _ => Err(Error::InvalidArgument("overlap of 1D and 2D states".into())),
    }
}

/// `arg ⟨ψ_initial|ψ_final⟩` in `(−π, π]`.
pub fn overlap_phase(initial: &WalkState, fin: &WalkState) -> Result<f64> {
    let o = overlap(initial, fin)?;
    if o.norm() <= 1e-12 {
        return Err(Error::VanishingOverlap(o.norm()));
    }
    Ok(crate::angles::principal(o.arg()))
}
