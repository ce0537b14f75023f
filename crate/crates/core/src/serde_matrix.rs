//! Serde adapter writing matrices as arrays of rows.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numerics::linalg::{from_rows, to_rows};
use crate::numerics::Matrix;

pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
    let rows = Vec::<Vec<f64>>::deserialize(d)?;
    from_rows(&rows).map_err(serde::de::Error::custom)
}
