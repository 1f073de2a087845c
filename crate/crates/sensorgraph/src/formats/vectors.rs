//! Files of 3-vectors, one `x y z` per line: plane normals or matched points.

use std::path::Path;

use sensorgraph_core::nalgebra::Vector3;

use super::{read_with, records, Fields, FileError, ParseError};

pub fn parse_vectors(text: &str) -> Result<Vec<Vector3<f64>>, ParseError> {
    records(text)
        .map(|(line, content, _)| {
            let mut f = Fields::new(line, content);
            let v = f.vector3("coordinate")?;
            f.finish()?;
            Ok(v)
        })
        .collect()
}

pub fn read_vectors(path: &Path) -> Result<Vec<Vector3<f64>>, FileError> {
    read_with(path, parse_vectors)
}
