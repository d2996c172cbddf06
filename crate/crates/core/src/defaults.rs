//! Every default used by the library and the command-line driver.

/// Micro time step as a fraction of the maximal reaction time.
pub const DT_OVER_TAU: f64 = 1e-3;
/// Scale parameters of a convergence study.
pub const EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// Scale parameters of the oscillating preset, fine enough that its
/// `O(eps)` ripple sits well below the drift.
pub const STALL_EPSILONS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
/// Scale parameters of a drift study.
pub const DRIFT_EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// Compact comparison region `[x0, x1] x [t0, t1]`.
pub const REGION: [f64; 4] = [-1.0, 1.0, 0.1, 1.0];
/// Time and window of the drift difference quotient.
pub const DRIFT_TIME: f64 = 1.0;
pub const DRIFT_WINDOW: f64 = 0.5;
/// Accepted deviation of the finest drift quotient from its limit.
pub const DRIFT_TOLERANCE: f64 = 5e-3;
/// Sample count for auditing tabulated speed laws.
pub const AUDIT_POINTS: usize = 4096;
/// Grid points in the delay-lag variable of the spacing hypothesis.
pub const LAG_POINTS: usize = 64;
/// Grid points used when certifying a spacing function.
pub const CERTIFICATE_POINTS: usize = 257;
/// Smallest grid accepted when certifying a spacing function.
pub const MIN_CERTIFICATE_POINTS: usize = 16;
/// Micro quadrature tolerance assumed by convergence verdicts.
pub const QUADRATURE_TOL: f64 = 1e-9;
/// Final sup error required for a "converging" verdict.
pub const CONVERGENCE_TOL: f64 = 1e-2;
/// Relative spread of the last three errors below which a study has stalled.
pub const STALL_SPREAD: f64 = 0.1;
/// Stalled errors must exceed this multiple of the quadrature tolerance.
pub const STALL_FLOOR_FACTOR: f64 = 10.0;
/// Macro space step (a power of two keeps linear data exact).
pub const MACRO_DX: f64 = 1.0 / 2048.0;
/// Macro time step as a fraction of the CFL limit `dx / C_F`, rounded down to a power of two.
pub const MACRO_CFL_FRACTION: f64 = 0.5;
/// Stored time rows of a macro field.
pub const MACRO_ROWS: usize = 128;
/// Time rows compared per scale in a convergence study.
pub const STUDY_ROWS: usize = 101;
