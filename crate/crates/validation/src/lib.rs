//! Holds the `acceptance` test target. Run it with
//! `cargo test -p weaktrace-validation --test acceptance`.
