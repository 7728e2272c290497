//! The multibump ansatz: projected bumps summed along a chain.

use super::placement::{bump_window, place_in_window, BumpSource, PlacedBump};
use super::projection::{attach_end_correction, project_bump, window_solve, ProjectedBump, WindowCache};
use crate::error::{Error, Result};
use crate::geometry::{Chain, CurveSpec};
use crate::pde::grid::{build_tube_grid, Grid, GridField};
use crate::profile::{BumpProfile, NonlinearitySpec};
use rayon::prelude::*;
use std::sync::Arc;

/// Window half-length, in units of `1/mu`, beyond which a profile is cut off.
pub const WINDOW_DECAY_LENGTHS: f64 = 25.0;

/// Everything needed to build `phi_R(X)` for chains on one tube.
#[derive(Debug)]
pub struct AnsatzContext {
    curve: CurveSpec,
    r: f64,
    grid: Arc<Grid>,
    lambda: f64,
    nl: NonlinearitySpec,
    plus: Arc<BumpProfile>,
    minus: Arc<BumpProfile>,
    src_plus: BumpSource,
    src_minus: BumpSource,
    half: f64,
    cache: WindowCache,
}

/// `phi_R(X)` together with the bumps it is made of.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub field: GridField,
    pub bumps: Vec<ProjectedBump>,
}

impl AnsatzContext {
    pub fn new(curve: &CurveSpec, r: f64, plus: Arc<BumpProfile>, minus: Arc<BumpProfile>) -> Result<Self> {
        if plus.sign() != 1 || minus.sign() != -1 {
            return Err(Error::RangeViolation("profiles must be given as (U+, U-)".into()));
        }
        if plus.lambda() != minus.lambda() || plus.grid().heta() != minus.grid().heta() {
            return Err(Error::RangeViolation("U+ and U- were computed for different problems".into()));
        }
        let h = plus.grid().heta();
        let grid = build_tube_grid(curve, r, h)?;
        let mu = plus.mu();
        let half = (plus.half_length().min(minus.half_length()) - 1.0).min(WINDOW_DECAY_LENGTHS / mu);
        Ok(AnsatzContext {
            curve: curve.clone(),
            r,
            grid,
            lambda: plus.lambda(),
            nl: *plus.nonlinearity(),
            src_plus: BumpSource::new(&plus),
            src_minus: BumpSource::new(&minus),
            plus,
            minus,
            half,
            cache: WindowCache::new(),
        })
    }

    /// Replaces the default window half-length; it may not exceed `L_xi - 1`.
    pub fn with_window_half_length(mut self, half: f64) -> Result<Self> {
        let max = self.plus.half_length().min(self.minus.half_length()) - 1.0;
        if !(half > 0.0 && half <= max + 1e-12) {
            return Err(Error::RangeViolation(format!("window half-length {half} outside (0, {max}]")));
        }
        self.half = half;
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nl
    }

    pub fn window_half_length(&self) -> f64 {
        self.half
    }

    pub fn profile(&self, sign: i8) -> &Arc<BumpProfile> {
        if sign > 0 {
            &self.plus
        } else {
            &self.minus
        }
    }

    pub fn source(&self, sign: i8) -> &BumpSource {
        if sign > 0 {
            &self.src_plus
        } else {
            &self.src_minus
        }
    }

    pub fn cache(&self) -> &WindowCache {
        &self.cache
    }

    /// Length of the expanded curve.
    pub fn tube_length(&self) -> f64 {
        self.r * self.curve.length()
    }

    /// Arc-length position of `R gamma(t)`.
    pub fn anchor(&self, t: f64) -> f64 {
        self.r * self.curve.arc_of_t(t)
    }

    pub fn place_at(&self, s0: f64, sign: i8) -> Result<PlacedBump> {
        let window = bump_window(&self.grid, s0, self.half)?;
        place_in_window(self.source(sign), &window, s0)
    }

    /// `V` for the bump at arc position `s0`, with `W` attached on open tubes.
    pub fn project_at(&self, s0: f64, sign: i8) -> Result<ProjectedBump> {
        let placed = self.place_at(s0, sign)?;
        let mut p = project_bump(&self.cache, &placed, self.lambda, &self.nl)?;
        if !self.grid.periodic() {
            attach_end_correction(&mut p, self.profile(sign), self.tube_length())?;
        }
        Ok(p)
    }

    /// `V` for the bump at `s0` but solved on a given window; used for
    /// difference quotients in the anchor position.
    pub fn project_in_window(&self, window: &Arc<Grid>, s0: f64, sign: i8) -> Result<GridField> {
        let placed = place_in_window(self.source(sign), window, s0)?;
        window_solve(&self.cache, self.lambda, &placed.field.map(|u| self.nl.f(u)))
    }

    /// Builds `phi_R(X)`. End corrections are skipped; they are diagnostics only.
    pub fn phi(&self, chain: &Chain) -> Result<Ansatz> {
        let bumps: Vec<ProjectedBump> = chain
            .arc_positions()
            .par_iter()
            .zip(chain.signs().par_iter())
            .map(|(&s0, &sign)| {
                let placed = self.place_at(s0, sign)?;
                project_bump(&self.cache, &placed, self.lambda, &self.nl)
            })
            .collect::<Result<_>>()?;
        let field = assemble_multibump(&self.grid, &bumps)?;
        Ok(Ansatz { field, bumps })
    }

    /// The sum of placed (unprojected) bumps along a chain.
    pub fn placed_sum(&self, chain: &Chain) -> Result<GridField> {
        let mut total = vec![0.0; self.grid.len()];
        for (&s0, &sign) in chain.arc_positions().iter().zip(chain.signs()) {
            self.place_at(s0, sign)?.field.add_into(&mut total, &self.grid)?;
        }
        GridField::new(self.grid.clone(), total)
    }
}

/// Column and row of the node closest to the anchor `s0` on the centre line.
pub fn anchor_node(grid: &Grid, s0: f64) -> (usize, usize) {
    let q = ((s0 - grid.s_origin()) / grid.hs()).round() as i64;
    let n = grid.ncols() as i64;
    let c = if grid.periodic() { q.rem_euclid(n) } else { q.clamp(0, n - 1) };
    (c as usize, grid.nrows() / 2)
}

/// Sums the projected bumps on the whole tube and checks the sign at every anchor.
pub fn assemble_multibump(grid: &Arc<Grid>, bumps: &[ProjectedBump]) -> Result<GridField> {
    let mut total = vec![0.0; grid.len()];
    for b in bumps {
        b.v.add_into(&mut total, grid)?;
    }
    let field = GridField::new(grid.clone(), total)?;
    for (index, b) in bumps.iter().enumerate() {
        let (c, j) = anchor_node(grid, b.placed.s0);
        let value = field.at(c, j);
        if value * b.placed.sign as f64 <= 0.0 {
            return Err(Error::SignPatternBroken { index, expected: b.placed.sign, value });
        }
    }
    Ok(field)
}
