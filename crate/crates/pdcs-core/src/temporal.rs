//! Temporal noise envelope.
