//! Big integers and rationals go out as decimal strings.

use serde::Serializer;
use std::fmt::Display;

pub(crate) fn as_string<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
