//! Problem data: the double-well landscape, the repulsive pair kernel and the
//! uniform symmetric grid everything is sampled on.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::agmon::agmon_a;
use crate::error::{Error, Result};

/// Confining landscape `min(|x + L/2|^s, |x - L/2|^s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    s: f64,
    separation: f64,
}

impl PotentialSpec {
    pub fn new(s: f64, separation: f64) -> Result<Self> {
        if !(s >= 2.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be >= 2, got {s}")));
        }
        if !(separation > 0.0) || !separation.is_finite() {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        Ok(Self { s, separation })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Distance `L` between the two well bottoms.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn half_separation(&self) -> f64 {
        0.5 * self.separation
    }

    /// `|x|^s`, the single well centered at the origin.
    pub fn single(&self, x: f64) -> f64 {
        x.abs().powf(self.s)
    }

    pub fn left(&self, x: f64) -> f64 {
        self.single(x + self.half_separation())
    }

    pub fn right(&self, x: f64) -> f64 {
        self.single(x - self.half_separation())
    }

    pub fn double(&self, x: f64) -> f64 {
        self.left(x).min(self.right(x))
    }

    pub fn value(&self, which: Well, x: f64) -> f64 {
        match which {
            Well::Double => self.double(x),
            Well::Left => self.left(x),
            Well::Right => self.right(x),
            Well::SingleCentered => self.single(x),
        }
    }
}

/// Which of the sampled landscapes to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Well {
    Double,
    Left,
    Right,
    SingleCentered,
}

/// Coupling and tent kernel `w(x) = height * max(0, 1 - |x|/radius)`.
///
/// The tent is the autocorrelation of a box, so its Fourier transform is a
/// squared sinc and in particular nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionSpec {
    lambda: f64,
    radius: f64,
    height: f64,
}

impl InteractionSpec {
    pub fn new(lambda: f64, radius: f64, height: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel radius must be positive, got {radius}"
            )));
        }
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel height must be positive, got {height}"
            )));
        }
        Ok(Self {
            lambda,
            radius,
            height,
        })
    }

    /// Same kernel, different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.radius, self.height)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn kernel(&self, x: f64) -> f64 {
        self.height * (1.0 - x.abs() / self.radius).max(0.0)
    }

    /// Kernel samples `w(j h)` for `j = 0..=m`, where `m h` is the last offset
    /// strictly inside the support.
    pub fn stencil(&self, spacing: f64) -> Vec<f64> {
        let reach = (self.radius / spacing).ceil() as usize;
        (0..=reach)
            .map(|j| self.kernel(j as f64 * spacing))
            .collect()
    }
}

/// Uniform grid `x_i = (i - m) h`, `i = 0..2m`, symmetric about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    spacing: f64,
    half_points: usize,
}

impl Grid {
    /// Grid with nodes `-X..=X`; `X` is rounded to the nearest multiple of `h`.
    pub fn new(half_extent: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid half extent must be positive, got {half_extent}"
            )));
        }
        let half_points = (half_extent / spacing).round().max(1.0) as usize;
        Ok(Self {
            spacing,
            half_points,
        })
    }

    pub fn from_half_points(half_points: usize, spacing: f64) -> Result<Self> {
        if half_points == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least 3 nodes".into(),
            ));
        }
        Self::new(half_points as f64 * spacing, spacing)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn n_points(&self) -> usize {
        2 * self.half_points + 1
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        self.half_points
    }

    pub fn half_extent(&self) -> f64 {
        self.half_points as f64 * self.spacing
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.half_points as f64) * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |i| self.x(i))
    }

    /// Index of the last node with `x_i <= x`, if any.
    pub fn floor_index(&self, x: f64) -> Option<usize> {
        let k = (x / self.spacing + self.half_points as f64).floor();
        if k < 0.0 {
            return None;
        }
        let mut i = (k as usize).min(self.n_points() - 1);
        // guard the rounding in the division
        while i + 1 < self.n_points() && self.x(i + 1) <= x {
            i += 1;
        }
        while i > 0 && self.x(i) > x {
            i -= 1;
        }
        (self.x(i) <= x).then_some(i)
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = (x / self.spacing + self.half_points as f64).round();
        k.clamp(0.0, (self.n_points() - 1) as f64) as usize
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField::new(*self, self.nodes().map(f).collect())
    }

    pub fn zeros(&self) -> GridField {
        GridField::new(*self, vec![0.0; self.n_points()])
    }
}

/// Options for [`build_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub spacing: f64,
    pub trunc_tol: f64,
    pub max_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            spacing: 0.02,
            trunc_tol: 1e-12,
            max_points: 200_001,
        }
    }
}

/// Distance beyond a well bottom after which `e^{-A}` drops below `tol`.
pub fn truncation_margin(s: f64, trunc_tol: f64) -> f64 {
    let p = 1.0 + 0.5 * s;
    (p * -trunc_tol.ln()).powf(1.0 / p)
}

/// Grid wide enough that eigenfunctions have decayed below the truncation
/// tolerance at the box walls.
pub fn build_grid(potential: &PotentialSpec, opts: &GridOptions) -> Result<Grid> {
    if !(opts.spacing > 0.0) || !opts.spacing.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid spacing must be positive, got {}",
            opts.spacing
        )));
    }
    if !(opts.trunc_tol > 0.0 && opts.trunc_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "trunc_tol must lie in (0, 1), got {}",
            opts.trunc_tol
        )));
    }
    let margin = truncation_margin(potential.s(), opts.trunc_tol);
    debug_assert!(agmon_a(margin, potential.s()) >= -opts.trunc_tol.ln() * (1.0 - 1e-12));
    let raw = potential.half_separation() + margin;
    // ceil keeps the margin rule intact; the epsilon absorbs representational noise
    let half_points = (raw / opts.spacing - 1e-9).ceil().max(1.0);
    let n_points = 2.0 * half_points + 1.0;
    if n_points > opts.max_points as f64 {
        return Err(Error::GridTooLarge {
            n_points: if n_points < usize::MAX as f64 {
                n_points as usize
            } else {
                usize::MAX
            },
            max_points: opts.max_points,
        });
    }
    Grid::from_half_points(half_points as usize, opts.spacing)
}

/// Real values on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(
            grid.n_points(),
            values.len(),
            "field length must match grid"
        );
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `h Σ u_i v_i`.
    pub fn dot(&self, other: &GridField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.spacing
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    /// `h Σ u_i²`.
    pub fn mass(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index reversal `x -> -x`.
    pub fn reflect(&self) -> GridField {
        let mut values = self.values.clone();
        values.reverse();
        GridField::new(self.grid, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> GridField {
        debug_assert_eq!(self.grid, other.grid);
        GridField::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> GridField {
        self.map(|v| v * factor)
    }

    pub fn add(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a * b)
    }

    /// `|u|²` nodewise.
    pub fn density(&self) -> GridField {
        self.map(|v| v * v)
    }

    /// Rescaled to the given mass. A zero field stays zero.
    pub fn normalized_to(&self, mass: f64) -> GridField {
        let current = self.mass();
        if current == 0.0 {
            return self.clone();
        }
        self.scaled((mass / current).sqrt())
    }

    /// `h Σ u_i`.
    pub fn integral(&self) -> f64 {
        self.grid.spacing * self.values.iter().sum::<f64>()
    }

    /// `h Σ_{i in mask} u_i`.
    pub fn integral_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        self.grid.spacing
            * self
                .grid
                .nodes()
                .zip(&self.values)
                .filter(|(x, _)| keep(*x))
                .map(|(_, v)| v)
                .sum::<f64>()
    }

    /// Largest |u(x) - u(-x)|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Samples one of the landscapes on the grid.
pub fn sample_potential(grid: &Grid, spec: &PotentialSpec, which: Well) -> GridField {
    grid.sample(|x| spec.value(which, x))
}

/// Samples the tent kernel at the grid nodes and checks that its discrete
/// Fourier transform is nonnegative.
pub fn kernel_field(grid: &Grid, spec: &InteractionSpec) -> Result<GridField> {
    let min_coefficient = kernel_min_fourier(grid.spacing(), spec);
    if min_coefficient < -1e-10 {
        return Err(Error::KernelNotPositive { min_coefficient });
    }
    Ok(grid.sample(|x| spec.kernel(x)))
}

/// Smallest real part of the DFT of the sampled kernel, laid out periodically.
pub fn kernel_min_fourier(spacing: f64, spec: &InteractionSpec) -> f64 {
    let stencil = spec.stencil(spacing);
    let reach = stencil.len() - 1;
    let len = (4 * reach + 4).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    buf[0].re = stencil[0];
    for (j, &w) in stencil.iter().enumerate().skip(1) {
        buf[j].re = w;
        buf[len - j].re = w;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
}

/// Everything defining one double-well instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub interaction: InteractionSpec,
}

impl Problem {
    pub fn new(
        potential: PotentialSpec,
        interaction: InteractionSpec,
        grid_opts: &GridOptions,
    ) -> Result<Self> {
        let grid = build_grid(&potential, grid_opts)?;
        kernel_field(&grid, &interaction)?;
        Ok(Self {
            grid,
            potential,
            interaction,
        })
    }

    pub fn sample(&self, which: Well) -> GridField {
        sample_potential(&self.grid, &self.potential, which)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_margin_example() {
        let pot = PotentialSpec::new(2.0, 4.0).unwrap();
        let opts = GridOptions {
            spacing: 0.1,
            trunc_tol: 1e-12,
            max_points: 100_000,
        };
        let grid = build_grid(&pot, &opts).unwrap();
        // oracle: invert m²/2 = ln(1e12) directly
        let margin = (2.0 * 1e12_f64.ln()).sqrt();
        assert!((margin - 7.4338).abs() < 1e-3);
        assert!(grid.half_extent() >= 2.0 + margin);
        assert!(grid.half_extent() < 2.0 + margin + 0.1 + 1e-12);
        assert!((grid.half_extent() - 9.5).abs() < 1e-12);
        assert_eq!(grid.n_points(), 191);
        assert_eq!(grid.x(grid.center()), 0.0);
        for i in 0..grid.n_points() {
            assert_eq!(grid.x(i), -grid.x(grid.n_points() - 1 - i));
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(
            PotentialSpec::new(2.0, 0.0),
            Err(Error::InvalidParameter(msg)) if msg.contains("L must be positive")
        ));
        assert!(PotentialSpec::new(1.5, 4.0).is_err());
        let pot = PotentialSpec::new(2.0, 4.0).unwrap();
        let mut opts = GridOptions::default();
        opts.spacing = 0.0;
        assert!(build_grid(&pot, &opts).is_err());
        opts.spacing = -0.1;
        assert!(build_grid(&pot, &opts).is_err());
        let opts = GridOptions {
            spacing: 1e-4,
            trunc_tol: 1e-12,
            max_points: 10_000,
        };
        assert!(matches!(
            build_grid(&pot, &opts),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn potential_examples() {
        let grid = Grid::new(10.0, 0.5).unwrap();
        let pot = PotentialSpec::new(2.0, 4.0).unwrap();
        let v = sample_potential(&grid, &pot, Well::Double);
        assert_eq!(v.values()[grid.center()], 4.0);
        assert_eq!(v.values()[grid.nearest_index(2.0)], 0.0);
        assert_eq!(v.values()[grid.nearest_index(-2.0)], 0.0);
        let pot4 = PotentialSpec::new(4.0, 6.0).unwrap();
        let left = sample_potential(&grid, &pot4, Well::Left);
        assert_eq!(left.values()[grid.center()], 81.0);
    }

    #[test]
    fn double_is_min_of_branches_and_even() {
        for (s, l) in [(2.0, 4.0), (3.0, 5.5), (4.0, 6.25)] {
            let grid = Grid::new(9.0, 0.013).unwrap();
            let pot = PotentialSpec::new(s, l).unwrap();
            let d = sample_potential(&grid, &pot, Well::Double);
            let a = sample_potential(&grid, &pot, Well::Left);
            let b = sample_potential(&grid, &pot, Well::Right);
            for i in 0..grid.n_points() {
                assert_eq!(d.values()[i], a.values()[i].min(b.values()[i]));
                assert!(d.values()[i] >= 0.0);
            }
            assert_eq!(d, d.reflect());
            assert_eq!(a, b.reflect());
        }
    }

    #[test]
    fn tent_kernel_examples() {
        let grid = Grid::new(2.0, 0.25).unwrap();
        let k = InteractionSpec::new(1.0, 0.5, 1.0).unwrap();
        let w = kernel_field(&grid, &k).unwrap();
        assert_eq!(w.values()[grid.center()], 1.0);
        assert_eq!(w.values()[grid.nearest_index(0.25)], 0.5);
        assert_eq!(w.values()[grid.nearest_index(0.5)], 0.0);
        assert_eq!(w.values()[grid.nearest_index(-0.75)], 0.0);

        let fine = Grid::new(3.0, 0.001).unwrap();
        let k2 = InteractionSpec::new(1.0, 0.5, 2.0).unwrap();
        let area = kernel_field(&fine, &k2).unwrap().integral();
        assert!((area - 1.0).abs() < 1e-9, "{area}");
    }

    #[test]
    fn tent_fourier_is_nonnegative_for_any_spacing() {
        for (radius, h) in [
            (0.5, 0.02),
            (0.5, 0.03),
            (0.37, 0.02),
            (1.0, 0.1),
            (0.05, 0.02),
        ] {
            let k = InteractionSpec::new(1.0, radius, 1.0).unwrap();
            assert!(kernel_min_fourier(h, &k) >= -1e-10, "{radius} {h}");
        }
    }

    #[test]
    fn reflection_is_an_involution() {
        let grid = Grid::new(3.0, 0.1).unwrap();
        let u = grid.sample(|x| (1.3 * x).sin() + 0.1 * x * x);
        assert_eq!(u.reflect().reflect(), u);
    }

    #[test]
    fn floor_index_brackets() {
        let grid = Grid::new(3.0, 0.1).unwrap();
        assert_eq!(grid.floor_index(-3.5), None);
        assert_eq!(grid.floor_index(-3.0), Some(0));
        let i = grid.floor_index(-1.0 + 1e-9).unwrap();
        assert!(grid.x(i) <= -1.0 + 1e-9 && grid.x(i + 1) > -1.0 + 1e-9);
        assert_eq!(grid.floor_index(10.0), Some(grid.n_points() - 1));
    }
}
