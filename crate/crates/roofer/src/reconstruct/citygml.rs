//! CityGML 2.0 output: one `CityModel` wrapping any number of buildings,
//! each with thematic boundary surfaces, a `lod2Solid` referencing them,
//! measured height, envelope, and (when a DEM was used) the terrain
//! intersection curve as `lod2MultiCurve`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::pointcloud::Point3;
use crate::util::atomic_write;

use super::{BuildingModel, SurfaceLabel};

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// gml:id values must be NCNames: keep alphanumerics, `_`, `-`, `.`; any
/// other character becomes `_`, and a leading non-letter gets a prefix.
fn gml_id(raw: &str) -> String {
    let mut id: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if !id.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false) {
        id.insert_str(0, "B_");
    }
    id
}

fn pos_list(ring: &[Point3]) -> String {
    let mut s = String::new();
    for (i, p) in ring.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        // `Display` prints the shortest representation that parses back to
        // the same f64, which exceeds the 9-significant-digit contract.
        let _ = write!(s, "{} {} {}", p.x, p.y, p.z);
    }
    s
}

/// Serialize buildings into one CityModel document.
pub fn citygml_string(models: &[BuildingModel]) -> String {
    let mut xml = String::new();
    xml.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    xml.push_str(
        "<core:CityModel xmlns:core=\"http://www.opengis.net/citygml/2.0\" \
         xmlns:bldg=\"http://www.opengis.net/citygml/building/2.0\" \
         xmlns:gml=\"http://www.opengis.net/gml\" \
         xmlns:xlink=\"http://www.w3.org/1999/xlink\">\n",
    );

    if !models.is_empty() {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for m in models {
            lo = Point3::new(
                lo.x.min(m.envelope.0.x),
                lo.y.min(m.envelope.0.y),
                lo.z.min(m.envelope.0.z),
            );
            hi = Point3::new(
                hi.x.max(m.envelope.1.x),
                hi.y.max(m.envelope.1.y),
                hi.z.max(m.envelope.1.z),
            );
        }
        let srs = models
            .iter()
            .find_map(|m| m.srs_name.as_deref())
            .map(|s| format!(" srsName=\"{}\"", xml_escape(s)))
            .unwrap_or_default();
        let _ = write!(
            xml,
            "  <gml:boundedBy>\n    <gml:Envelope{srs} srsDimension=\"3\">\n      \
             <gml:lowerCorner>{} {} {}</gml:lowerCorner>\n      \
             <gml:upperCorner>{} {} {}</gml:upperCorner>\n    \
             </gml:Envelope>\n  </gml:boundedBy>\n",
            lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
        );
    }

    for model in models {
        let bid = gml_id(&model.id);
        let _ = write!(
            xml,
            "  <core:cityObjectMember>\n    <bldg:Building gml:id=\"{bid}\">\n"
        );
        let _ = write!(
            xml,
            "      <bldg:measuredHeight uom=\"m\">{}</bldg:measuredHeight>\n",
            model.measured_height
        );

        // Solid referencing every boundary polygon by link.
        xml.push_str("      <bldg:lod2Solid>\n        <gml:Solid>\n          <gml:exterior>\n            <gml:CompositeSurface>\n");
        for (i, _) in model.surfaces.iter().enumerate() {
            let _ = write!(
                xml,
                "              <gml:surfaceMember xlink:href=\"#{bid}_poly_{i}\"/>\n"
            );
        }
        xml.push_str("            </gml:CompositeSurface>\n          </gml:exterior>\n        </gml:Solid>\n      </bldg:lod2Solid>\n");

        if let Some(curve) = &model.terrain_curve {
            let _ = write!(
                xml,
                "      <bldg:lod2MultiCurve>\n        <gml:MultiCurve>\n          \
                 <gml:curveMember>\n            <gml:LineString>\n              \
                 <gml:posList srsDimension=\"3\">{}</gml:posList>\n            \
                 </gml:LineString>\n          </gml:curveMember>\n        \
                 </gml:MultiCurve>\n      </bldg:lod2MultiCurve>\n",
                pos_list(curve)
            );
        }

        for (i, surface) in model.surfaces.iter().enumerate() {
            let tag = surface.label.citygml_name();
            let _ = write!(
                xml,
                "      <bldg:boundedBy>\n        <bldg:{tag} gml:id=\"{bid}_{}_{i}\">\n          \
                 <bldg:lod2MultiSurface>\n            <gml:MultiSurface>\n              \
                 <gml:surfaceMember>\n                <gml:Polygon gml:id=\"{bid}_poly_{i}\">\n                  \
                 <gml:exterior>\n                    <gml:LinearRing>\n                      \
                 <gml:posList srsDimension=\"3\">{}</gml:posList>\n                    \
                 </gml:LinearRing>\n                  </gml:exterior>\n                \
                 </gml:Polygon>\n              </gml:surfaceMember>\n            \
                 </gml:MultiSurface>\n          </bldg:lod2MultiSurface>\n        \
                 </bldg:{tag}>\n      </bldg:boundedBy>\n",
                match surface.label {
                    SurfaceLabel::Roof => "roof",
                    SurfaceLabel::Wall => "wall",
                    SurfaceLabel::Ground => "ground",
                },
                pos_list(&surface.ring)
            );
        }
        xml.push_str("    </bldg:Building>\n  </core:cityObjectMember>\n");
    }
    xml.push_str("</core:CityModel>\n");
    xml
}

/// Write the CityModel atomically.
pub fn write_citygml(models: &[BuildingModel], path: &Path) -> Result<()> {
    atomic_write(path, citygml_string(models).as_bytes())
}
