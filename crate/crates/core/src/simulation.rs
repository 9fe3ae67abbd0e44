//! Monte Carlo harness: skew-t data over grids of `(p, n, nu, rho)`, empirical
//! maximal skewness against its theoretical value, MSE tables as CSV.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingDistribution;
use crate::model::SmsnParams;
use crate::numerics::rng::mix64;
use crate::numerics::{toeplitz_corr, RngStream, Vector};
use crate::skewness::{analytic_max_direction, analytic_max_skewness, estimate_max_direction, EstimatorOptions};

pub const DEFAULT_REPLICATIONS: usize = 200;
pub const FULL_REPLICATIONS: usize = 5000;

/// How the shape vector is built for each dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaSpec {
    /// All entries equal, scaled to the given Euclidean norm.
    EqualNorm { norm: f64 },
    /// The same explicit vector for every cell; its length must match every `p`.
    Explicit { values: Vec<f64> },
}

impl Default for AlphaSpec {
    fn default() -> Self {
        Self::EqualNorm { norm: 3.0 }
    }
}

impl AlphaSpec {
    pub fn build(&self, p: usize) -> Result<Vector<f64>> {
        match self {
            Self::EqualNorm { norm } => Ok(Vector::from_fn(p, |_| norm / (p as f64).sqrt())),
            Self::Explicit { values } if values.len() == p => Vector::new(values.clone()),
            Self::Explicit { values } => Err(Error::DimMismatch { expected: p, got: values.len() }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawScope {
    /// Fresh scales for every replication.
    #[default]
    Replication,
    /// One draw shared by all replications of a cell.
    Cell,
}

/// How the diagonal scales `omega` are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OmegaSpec {
    /// Independent uniform integers in `low..=high`.
    RandomIntegers {
        low: u32,
        high: u32,
        #[serde(default)]
        per: DrawScope,
    },
    Explicit { values: Vec<f64> },
}

impl Default for OmegaSpec {
    fn default() -> Self {
        Self::RandomIntegers { low: 1, high: 5, per: DrawScope::Replication }
    }
}

impl OmegaSpec {
    fn draw(&self, p: usize, rng: &mut RngStream) -> Result<Vector<f64>> {
        match self {
            Self::RandomIntegers { low, high, .. } => {
                let span = (high - low + 1) as f64;
                Ok(Vector::from_fn(p, |_| {
                    let k = (rng.open01() * span).floor().min(span - 1.0);
                    *low as f64 + k
                }))
            }
            Self::Explicit { values } if values.len() == p => Vector::new(values.clone()),
            Self::Explicit { values } => Err(Error::DimMismatch { expected: p, got: values.len() }),
        }
    }

    fn per_cell(&self) -> bool {
        matches!(self, Self::RandomIntegers { per: DrawScope::Cell, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub p: Vec<usize>,
    pub n: Vec<usize>,
    pub nu: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: AlphaSpec,
    pub omega: OmegaSpec,
    pub replications: usize,
    pub seed: u64,
    pub estimator: EstimatorOptions,
    /// Keep one record per replication in the report.
    pub keep_replications: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            p: vec![2, 10, 18],
            n: vec![20, 100, 500],
            nu: vec![4.0, 8.0, 20.0, 100.0],
            rho: vec![-0.8, -0.3, 0.4, 0.9],
            alpha: AlphaSpec::default(),
            omega: OmegaSpec::default(),
            replications: DEFAULT_REPLICATIONS,
            seed: 20_240_601,
            estimator: EstimatorOptions::default(),
            keep_replications: false,
        }
    }
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub p: usize,
    pub n: usize,
    pub nu: f64,
    pub rho: f64,
}

impl Cell {
    /// Stream key derived from the cell's values, so a cell draws the same data
    /// whatever grid it belongs to.
    fn key(&self) -> u64 {
        let mut h = mix64(self.p as u64);
        for v in [self.n as u64, self.nu.to_bits(), self.rho.to_bits()] {
            h = mix64(h ^ v);
        }
        h
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        for &nu in &self.nu {
            if !(nu > 3.0) || !nu.is_finite() {
                return bad(format!("nu must exceed 3 for a finite third moment, got {nu}"));
            }
        }
        for &rho in &self.rho {
            if !(rho.abs() < 1.0) {
                return bad(format!("rho must lie in (-1, 1), got {rho}"));
            }
        }
        for &p in &self.p {
            if p == 0 {
                return bad("p must be positive".into());
            }
            self.alpha.build(p)?;
            if let OmegaSpec::Explicit { values } = &self.omega {
                if values.len() != p {
                    return Err(Error::DimMismatch { expected: p, got: values.len() });
                }
                if values.iter().any(|&w| !(w > 0.0)) {
                    return bad("omega entries must be positive".into());
                }
            }
            for &n in &self.n {
                if n < p + 2 {
                    return bad(format!("n = {n} too small for p = {p} (need at least {})", p + 2));
                }
            }
        }
        if let OmegaSpec::RandomIntegers { low, high, .. } = self.omega {
            if low == 0 || high < low {
                return bad(format!("omega integer range {low}..={high} must be positive and non-empty"));
            }
        }
        if self.estimator.max_iter == 0 || !(self.estimator.tol > 0.0) {
            return bad("estimator needs max_iter >= 1 and tol > 0".into());
        }
        Ok(())
    }

    /// Grid points in lexicographic `(p, n, nu, rho)` order, duplicates removed.
    pub fn cells(&self) -> Vec<Cell> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let mut ps = self.p.clone();
        ps.sort_unstable();
        ps.dedup();
        let mut ns = self.n.clone();
        ns.sort_unstable();
        ns.dedup();
        let (nus, rhos) = (sorted(&self.nu), sorted(&self.rho));
        let mut cells = Vec::new();
        for &p in &ps {
            for &n in &ns {
                for &nu in &nus {
                    for &rho in &rhos {
                        cells.push(Cell { p, n, nu, rho });
                    }
                }
            }
        }
        cells
    }
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub cell: Cell,
    pub replication: usize,
    /// `None` when the estimator failed.
    pub gamma1_hat: Option<f64>,
    pub gamma1_theory: f64,
    pub sq_err_gamma1: Option<f64>,
    pub sq_err_direction: Option<f64>,
    pub direction: Option<Vec<f64>>,
}

/// Aggregates of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub cell: Cell,
    /// Replications that produced an estimate.
    pub replications: usize,
    pub failures: usize,
    pub mse_gamma1: f64,
    pub mse_direction: f64,
    pub mean_gamma1_hat: f64,
    /// Mean of the theoretical maximal skewness over replications.
    pub gamma1_theory: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimulationReport {
    pub cells: Vec<CellRecord>,
    pub replications: Vec<ReplicationRecord>,
}

/// Sign-folded squared distance `min(|est - ref|^2, |est + ref|^2)` between unit vectors.
pub fn mse_direction(est: &Vector<f64>, reference: &Vector<f64>) -> Result<f64> {
    if est.dim() != reference.dim() {
        return Err(Error::DimMismatch { expected: reference.dim(), got: est.dim() });
    }
    for v in [est, reference] {
        if (v.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!("direction must have unit norm, got {}", v.norm())));
        }
    }
    let minus = est.sub(reference);
    let plus = est.add(reference);
    Ok(minus.dot(&minus).min(plus.dot(&plus)))
}

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn cell_model(cfg: &SimulationConfig, cell: &Cell, omega: &Vector<f64>) -> Result<SmsnParams<f64>> {
    SmsnParams::from_correlation(
        Vector::zeros(cell.p),
        omega,
        &toeplitz_corr(cell.rho, cell.p)?,
        cfg.alpha.build(cell.p)?,
        MixingDistribution::skew_t(cell.nu)?,
    )
}

fn cell_omega(cfg: &SimulationConfig, cell: &Cell) -> Result<Option<Vector<f64>>> {
    if cfg.omega.per_cell() {
        let mut rng = RngStream::new(cfg.seed, cell.key());
        Ok(Some(cfg.omega.draw(cell.p, &mut rng)?))
    } else {
        Ok(None)
    }
}

fn run_replication(
    cfg: &SimulationConfig,
    cell: &Cell,
    shared_omega: Option<&Vector<f64>>,
    r: usize,
) -> Result<ReplicationRecord> {
    let mut rng = RngStream::new(cfg.seed, mix64(cell.key() ^ mix64(r as u64 + 1)));
    let omega = match shared_omega {
        Some(w) => w.clone(),
        None => cfg.omega.draw(cell.p, &mut rng)?,
    };
    let params = cell_model(cfg, cell, &omega)?;
    let gamma1_theory = analytic_max_skewness(&params)?;
    let truth = analytic_max_direction(&params)?.direction;
    let data = params.sample(cell.n, &mut rng)?;
    let opts = EstimatorOptions { seed: mix64(rng.next_u64()), ..cfg.estimator };
    let mut record = ReplicationRecord {
        cell: *cell,
        replication: r,
        gamma1_hat: None,
        gamma1_theory,
        sq_err_gamma1: None,
        sq_err_direction: None,
        direction: None,
    };
    if let Ok(est) = estimate_max_direction(&data, &opts) {
        if est.gamma1.is_finite() {
            record.sq_err_gamma1 = Some((est.gamma1 - gamma1_theory).powi(2));
            record.sq_err_direction = Some(mse_direction(&est.direction, &truth)?);
            record.gamma1_hat = Some(est.gamma1);
            record.direction = Some(est.direction.into_vec());
        }
    }
    Ok(record)
}

fn aggregate(cell: Cell, records: &[ReplicationRecord]) -> CellRecord {
    let (mut e_g, mut e_d, mut g_hat, mut g_th) =
        (NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default());
    let mut used = 0;
    for rec in records {
        g_th.add(rec.gamma1_theory);
        if let (Some(g), Some(eg), Some(ed)) = (rec.gamma1_hat, rec.sq_err_gamma1, rec.sq_err_direction) {
            used += 1;
            g_hat.add(g);
            e_g.add(eg);
            e_d.add(ed);
        }
    }
    let mean = |s: NeumaierSum, k: usize| if k == 0 { f64::NAN } else { s.value() / k as f64 };
    CellRecord {
        cell,
        replications: used,
        failures: records.len() - used,
        mse_gamma1: mean(e_g, used),
        mse_direction: mean(e_d, used),
        mean_gamma1_hat: mean(g_hat, used),
        gamma1_theory: mean(g_th, records.len()),
    }
}

/// Runs every replication of one grid point.
pub fn run_cell(cfg: &SimulationConfig, cell: &Cell) -> Result<(CellRecord, Vec<ReplicationRecord>)> {
    let shared = cell_omega(cfg, cell)?;
    let records = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, cell, shared.as_ref(), r))
        .collect::<Result<Vec<_>>>()?;
    Ok((aggregate(*cell, &records), records))
}

/// Runs the full grid. `progress(done, total)` is called as replications finish.
pub fn run_experiment_with_progress(
    cfg: &SimulationConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<SimulationReport> {
    cfg.validate()?;
    let cells = cfg.cells();
    let shared = cells.iter().map(|c| cell_omega(cfg, c)).collect::<Result<Vec<_>>>()?;
    let total = cells.len() * cfg.replications;
    let done = AtomicUsize::new(0);
    let records = (0..total)
        .into_par_iter()
        .map(|k| {
            let (ci, r) = (k / cfg.replications, k % cfg.replications);
            let rec = run_replication(cfg, &cells[ci], shared[ci].as_ref(), r);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            rec
        })
        .collect::<Result<Vec<_>>>()?;
    let cell_records = cells
        .iter()
        .zip(records.chunks(cfg.replications.max(1)))
        .map(|(c, chunk)| aggregate(*c, chunk))
        .collect();
    Ok(SimulationReport {
        cells: cell_records,
        replications: if cfg.keep_replications { records } else { Vec::new() },
    })
}

pub fn run_experiment(cfg: &SimulationConfig) -> Result<SimulationReport> {
    run_experiment_with_progress(cfg, &|_, _| {})
}

/// `printf("%g")` with six significant digits.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        strip(&format!("{x:.decimals$}"))
    }
}

impl SimulationReport {
    pub const CSV_HEADER: &'static str = "p,n,nu,rho,replications,mse_gamma1,mse_direction,mean_gamma1_hat,gamma1_theory";

    pub fn cell(&self, p: usize, n: usize, nu: f64, rho: f64) -> Option<&CellRecord> {
        self.cells.iter().find(|c| c.cell.p == p && c.cell.n == n && c.cell.nu == nu && c.cell.rho == rho)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.cell.p,
                c.cell.n,
                format_g(c.cell.nu),
                format_g(c.cell.rho),
                c.replications,
                format_g(c.mse_gamma1),
                format_g(c.mse_direction),
                format_g(c.mean_gamma1_hat),
                format_g(c.gamma1_theory),
            );
        }
        out
    }

    /// One row per replication; `direction` holds the components separated by `;`.
    pub fn replications_csv(&self) -> String {
        let mut out =
            String::from("p,n,nu,rho,replication,gamma1_hat,gamma1_theory,sq_err_gamma1,sq_err_direction,direction\n");
        let opt = |v: Option<f64>| v.map(format_g).unwrap_or_default();
        for r in &self.replications {
            let dir = r
                .direction
                .as_ref()
                .map(|d| d.iter().map(|&x| format_g(x)).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.cell.p,
                r.cell.n,
                format_g(r.cell.nu),
                format_g(r.cell.rho),
                r.replication,
                opt(r.gamma1_hat),
                format_g(r.gamma1_theory),
                opt(r.sq_err_gamma1),
                opt(r.sq_err_direction),
                dir,
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(p: Vec<usize>, n: Vec<usize>, nu: Vec<f64>, rho: Vec<f64>, reps: usize) -> SimulationConfig {
        SimulationConfig { p, n, nu, rho, replications: reps, seed: 99, ..Default::default() }
    }

    #[test]
    fn mse_direction_examples() {
        let e1 = Vector::basis(2, 0);
        let e2 = Vector::basis(2, 1);
        assert_eq!(mse_direction(&e1, &e1).unwrap(), 0.0);
        assert_eq!(mse_direction(&e1.scale(-1.0), &e1).unwrap(), 0.0);
        assert_eq!(mse_direction(&e1, &e2).unwrap(), 2.0);
        assert!(mse_direction(&e1.scale(2.0), &e2).is_err());
        let u = Vector::new(vec![0.6, 0.8]).unwrap();
        let d = mse_direction(&u, &e1).unwrap();
        assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn format_g_matches_printf() {
        for (x, s) in [
            (0.0, "0"),
            (1.0, "1"),
            (0.0041, "0.0041"),
            (305.0978, "305.098"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (0.990565849244124, "0.990566"),
            (999999.5, "1e+06"),
            (f64::NAN, "nan"),
            (4.0, "4"),
            (-0.8, "-0.8"),
        ] {
            assert_eq!(format_g(x), s, "{x}");
        }
    }

    #[test]
    fn empty_grid() {
        let cfg = small(vec![], vec![20], vec![4.0], vec![0.0], 5);
        let report = run_experiment(&cfg).unwrap();
        assert!(report.cells.is_empty());
        assert_eq!(report.to_csv(), format!("{}\n", SimulationReport::CSV_HEADER));
    }

    #[test]
    fn two_cells_and_order() {
        let cfg = small(vec![2], vec![100, 30], vec![8.0], vec![0.4], 6);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2);
        assert_eq!(report.cells[0].cell.n, 30);
        assert_eq!(report.cells[1].cell.n, 100);
        for c in &report.cells {
            assert_eq!(c.replications + c.failures, 6);
            assert!(c.mse_gamma1 >= 0.0 && (0.0..=2.0).contains(&c.mse_direction));
        }
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("2,30,8,0.4,"));
    }

    #[test]
    fn deterministic_and_grid_independent() {
        let cfg = small(vec![2], vec![50], vec![6.0], vec![-0.3], 1);
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&cfg).unwrap().to_csv();
        assert_eq!(a, b);

        let cfg = small(vec![2], vec![50], vec![6.0], vec![-0.3], 8);
        let wide = small(vec![2, 3], vec![40, 50], vec![6.0, 9.0], vec![-0.3], 8);
        let alone = run_experiment(&cfg).unwrap();
        let within = run_experiment(&wide).unwrap();
        assert_eq!(&alone.cells[0], within.cell(2, 50, 6.0, -0.3).unwrap());
        let (single, _) = run_cell(&cfg, &cfg.cells()[0]).unwrap();
        assert_eq!(alone.cells[0], single);
    }

    #[test]
    fn per_cell_omega_is_shared() {
        let mut cfg = small(vec![3], vec![30], vec![10.0], vec![0.4], 4);
        cfg.omega = OmegaSpec::RandomIntegers { low: 1, high: 5, per: DrawScope::Cell };
        cfg.keep_replications = true;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.replications.len(), 4);
        let csv = report.replications_csv();
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn theory_constant_across_scales() {
        // the maximal skewness does not depend on the drawn diagonal scales
        let mut cfg = small(vec![3], vec![30], vec![10.0], vec![0.4], 12);
        cfg.keep_replications = true;
        let report = run_experiment(&cfg).unwrap();
        let first = report.replications[0].gamma1_theory;
        for r in &report.replications {
            assert!((r.gamma1_theory - first).abs() < 1e-10 * first);
        }
    }

    #[test]
    fn omega_draws_in_range() {
        let spec = OmegaSpec::default();
        let mut rng = RngStream::new(1, 2);
        let mut seen = [false; 5];
        for _ in 0..200 {
            for &w in spec.draw(4, &mut rng).unwrap().iter() {
                assert!(w.fract() == 0.0 && (1.0..=5.0).contains(&w));
                seen[w as usize - 1] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn validation() {
        assert!(small(vec![2], vec![20], vec![3.0], vec![0.0], 2).validate().is_err());
        assert!(small(vec![2], vec![20], vec![4.0], vec![1.0], 2).validate().is_err());
        assert!(small(vec![2], vec![3], vec![4.0], vec![0.0], 2).validate().is_err());
        assert!(small(vec![2], vec![20], vec![4.0], vec![0.0], 0).validate().is_err());
        let mut cfg = small(vec![2, 3], vec![20], vec![4.0], vec![0.0], 2);
        cfg.alpha = AlphaSpec::Explicit { values: vec![1.0, 2.0] };
        assert!(cfg.validate().is_err());
        assert!(small(vec![2], vec![20], vec![4.0], vec![0.0], 2).validate().is_ok());
    }

    #[test]
    fn config_json() {
        let cfg: SimulationConfig = serde_json::from_str(
            r#"{"p":[2],"n":[20,500],"nu":[100],"rho":[-0.8],"replications":10,"seed":5,
                "alpha":{"rule":"explicit","values":[3,0]},
                "omega":{"rule":"random-integers","low":1,"high":5,"per":"cell"},
                "estimator":{"restarts":4}}"#,
        )
        .unwrap();
        assert_eq!(cfg.estimator.restarts, 4);
        assert_eq!(cfg.estimator.max_iter, 500);
        assert_eq!(cfg.omega, OmegaSpec::RandomIntegers { low: 1, high: 5, per: DrawScope::Cell });
        let back: SimulationConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn more_data_lowers_error_near_normal_tails() {
        let cfg = small(vec![2], vec![20, 500], vec![1e6], vec![-0.8], 100);
        let report = run_experiment(&cfg).unwrap();
        let a = report.cell(2, 20, 1e6, -0.8).unwrap().mse_gamma1;
        let b = report.cell(2, 500, 1e6, -0.8).unwrap().mse_gamma1;
        assert!(b < a, "{b} vs {a}");
    }
}
