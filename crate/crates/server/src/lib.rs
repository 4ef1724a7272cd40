//! Command-line tools and the HTTP service for NSU classification and
//! resolution.

pub mod api;
pub mod commands;
