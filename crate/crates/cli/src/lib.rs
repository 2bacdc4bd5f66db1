//! Orchestration layer: configuration, run manifests and the pipeline
//! stages behind the `cocomment` binary.

pub mod config;
pub mod manifest;
pub mod stages;

pub use config::PipelineConfig;

/// Map an error to the documented process exit code: 2 for configuration
/// errors, 3 for input problems, 4 for resource limits.
pub fn exit_code(err: &cocomment_core::Error) -> i32 {
    use cocomment_core::Error;
    match err {
        Error::Config(_) => 2,
        Error::Resource(_) => 4,
        Error::Io(_) | Error::Parse { .. } | Error::InvalidInput(_) | Error::Undefined(_) => 3,
    }
}
