//! Monte-Carlo hypothesis sampling, Bayes decision-region design,
//! classification, confusion statistics and scripted attack timelines.

pub mod confusion;
pub mod cost;
pub mod dataset;
pub mod priors;
pub mod regions;
pub mod timeline;

pub use confusion::{confusion, ConfusionMatrix};
pub use cost::CostModel;
pub use dataset::{generate_dataset, measure_epoch, Dataset, MonteCarloConfig, Sample};
pub use priors::{
    draw_scenario, HypothesisPriors, JammingPrior, MultipathPrior, Scenario, SpoofingPrior, Theta,
    TrackingModel,
};
pub use regions::{classify, design_regions, Axis, DecisionRegionGrid, GridSpec, Provenance};
pub use timeline::{simulate_timeline, Ramp, Schedule, Span, Timeline, TimelineEpoch};
