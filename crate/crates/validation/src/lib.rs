//! Empty library; the crate exists to host the `acceptance` test target.
