//! placeholder
#[derive(Debug)]
pub struct ContinuationState {
    pub t_reached: f64,
}
impl std::fmt::Display for ContinuationState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t={}", self.t_reached)
    }
}
pub struct SolveOptions;
pub struct SolveReport;
