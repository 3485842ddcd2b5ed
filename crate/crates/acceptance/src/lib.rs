//! End-to-end acceptance run for `lpcoreset`. The checks live in
//! `tests/acceptance.rs`; run them with
//! `cargo test --release -p lpcoreset-acceptance --test acceptance`.
