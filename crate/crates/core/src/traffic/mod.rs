//! Scenario traffic: departure schedules, routing and lane choice.

mod routing;
mod scenario;

pub use routing::{assign_lane, plan_route, Edge, Node, NodeId, NodeKind, Path, RoadGraph};
pub use scenario::{
    apportion, generate_schedule, sample_weibull, Arrival, ArrivalSchedule, ScenarioConfig,
    ScenarioName, ScenarioVolumes, DEFAULT_EPISODE_LENGTH, DEFAULT_FAVORED_SHARE,
    DEFAULT_STRAIGHT_FRACTION, DEFAULT_WEIBULL_SHAPE,
};
