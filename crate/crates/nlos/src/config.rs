//! Run configuration for the CLI.
