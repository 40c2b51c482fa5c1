//! Holds the `acceptance` test target; run it with
//! `cargo test -p sigtest-validation --test acceptance`.
