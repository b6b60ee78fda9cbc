//! Verdicts on price surfaces and model pairs: discrete convexity, ordering
//! between models, and local probes of the generator on convex test functions.

mod compare;
mod convexity;
mod lcp;

pub use compare::{compare_models, hypothesis_screen, ComparisonMethod, ComparisonReport, PointComparison, ScreenItem};
pub use convexity::{
    check_convexity, check_convexity_in, default_convexity_tolerance, ConvexityReport, Location, SliceConvexity,
    SurfaceProvenance,
};
pub use lcp::{lcp_scan, lcp_scan_with, LcpOptions, LcpProbe, LcpReport, LcpVerdict};
