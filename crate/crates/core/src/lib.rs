//! Task planning over graph-based world states, with oracle-guided pruning of
//! the state down to task-relevant objects before search.
//!
//! The pipeline: [`taxonomy`] descent selects candidate object classes,
//! [`reduction`] grows that seed through relation frontiers, and
//! [`planners`] search the induced subgraph using the action schemas in
//! [`domain`]. [`benchgen`] produces seeded household worlds and tasks to
//! measure all of it.

pub mod benchgen;
pub mod domain;
pub mod oracle;
pub mod planners;
pub mod reduction;
pub mod taxonomy;
pub mod world;
