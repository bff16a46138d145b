//! GeoJSON FeatureCollection export of band boundaries.

use serde_json::{json, Map, Value};

use super::{contour_bbox, extract_contour, BandBoundary, ContourError, Predictor};
use crate::geometry::{BBox, CoordinateMode, Polygon};

/// Ring as closed GeoJSON positions `[lon, lat]`.
fn ring_coords(ring: &Polygon, frame: CoordinateMode) -> Value {
    let mut coords: Vec<Value> = ring
        .vertices()
        .iter()
        .map(|&p| {
            let q = frame.to_lonlat(p);
            json!([q.x, q.y])
        })
        .collect();
    coords.push(coords[0].clone());
    Value::Array(coords)
}

fn properties(cell_id: &str, b: &BandBoundary) -> Map<String, Value> {
    let (nu, gamma) = match &b.predictor {
        Predictor::OcSvm(m) => (json!(m.nu()), json!(m.gamma())),
        Predictor::Hull(_) => (Value::Null, Value::Null),
    };
    let mut props = Map::new();
    props.insert("cell_id".into(), json!(cell_id));
    props.insert("band".into(), json!(b.band.ordinal()));
    props.insert("method".into(), json!(b.method().as_str()));
    props.insert("nu".into(), nu);
    props.insert("gamma".into(), gamma);
    props.insert("mode".into(), json!(b.mode.as_str()));
    props
}

/// Result of rendering one boundary.
#[derive(Debug)]
pub enum FeatureOutcome {
    Feature(Value),
    /// Contour had no rings; carries the diagnostic.
    Degenerate(String),
}

/// Renders one boundary. OC-SVM boundaries are contoured over `bbox`
/// (model frame) or the default contour box when `None`.
pub fn boundary_feature(
    cell_id: &str,
    boundary: &BandBoundary,
    bbox: Option<BBox>,
    resolution: usize,
) -> Result<FeatureOutcome, ContourError> {
    let geometry = match &boundary.predictor {
        Predictor::Hull(h) => json!({
            "type": "Polygon",
            "coordinates": [ring_coords(&h.polygon, h.coordinate_mode)],
        }),
        Predictor::OcSvm(m) => {
            let bbox = bbox.unwrap_or_else(|| contour_bbox(m));
            let contours = extract_contour(m, bbox, resolution)?;
            let polys = contours.polygons();
            if polys.is_empty() {
                return Ok(FeatureOutcome::Degenerate(
                    contours
                        .diagnostic
                        .unwrap_or_else(|| "no outer ring".to_string()),
                ));
            }
            let frame = m.coordinate_mode;
            let rendered: Vec<Value> = polys
                .iter()
                .map(|(outer, holes)| {
                    let mut rings = vec![ring_coords(outer, frame)];
                    rings.extend(holes.iter().map(|h| ring_coords(h, frame)));
                    Value::Array(rings)
                })
                .collect();
            if rendered.len() == 1 {
                json!({ "type": "Polygon", "coordinates": rendered[0] })
            } else {
                json!({ "type": "MultiPolygon", "coordinates": rendered })
            }
        }
    };
    Ok(FeatureOutcome::Feature(json!({
        "type": "Feature",
        "geometry": geometry,
        "properties": Value::Object(properties(cell_id, boundary)),
    })))
}

pub fn feature_collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}
