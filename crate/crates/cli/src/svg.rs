//! Deterministic SVG rendering of labeled concave polygons.
//!
//! Every coordinate is computed in exact rational arithmetic and printed with
//! exactly two decimals (round half away from zero), so identical inputs
//! produce identical bytes on every platform.

use std::fmt::Write as _;

use hnslope_core::polygon::ConcavePolygon;
use hnslope_core::rat::{fmt_rat, rat_int, Rat};
use num::ToPrimitive;

pub const WIDTH: u32 = 800;
pub const HEIGHT: u32 = 600;

// Plot rectangle inside the 800×600 viewport; the strip right of PLOT_RIGHT
// holds the legend.
const PLOT_LEFT: i64 = 60;
const PLOT_RIGHT: i64 = 640;
const PLOT_TOP: i64 = 40;
const PLOT_BOTTOM: i64 = 560;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Fixed two-decimal rendering of an exact rational.
fn dec2(r: &Rat) -> String {
    let v = (r * rat_int(100)).round().to_integer();
    let neg = v < num::BigInt::ZERO;
    let a = if neg { -v } else { v };
    let int = &a / 100;
    let frac = (&a % num::BigInt::from(100)).to_u8().expect("|x mod 100| < 100");
    format!("{}{int}.{frac:02}", if neg { "-" } else { "" })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Affine map from data coordinates to the plot rectangle, exact over ℚ.
struct Frame {
    xmin: Rat,
    xmax: Rat,
    ymin: Rat,
    ymax: Rat,
}

impl Frame {
    fn around(polygons: &[(String, ConcavePolygon)]) -> Frame {
        let mut xmax = rat_int(1);
        let mut ymin = rat_int(0);
        let mut ymax = rat_int(0);
        for (_, poly) in polygons {
            for (x, y) in poly.vertices() {
                if x > xmax {
                    xmax = x;
                }
                if y < ymin {
                    ymin = y.clone();
                }
                if y > ymax {
                    ymax = y;
                }
            }
        }
        if ymax == ymin {
            ymax = &ymin + rat_int(1);
        }
        Frame { xmin: rat_int(0), xmax, ymin, ymax }
    }

    fn mx(&self, x: &Rat) -> Rat {
        rat_int(PLOT_LEFT)
            + (x - &self.xmin) * rat_int(PLOT_RIGHT - PLOT_LEFT) / (&self.xmax - &self.xmin)
    }

    fn my(&self, y: &Rat) -> Rat {
        rat_int(PLOT_BOTTOM)
            - (y - &self.ymin) * rat_int(PLOT_BOTTOM - PLOT_TOP) / (&self.ymax - &self.ymin)
    }

    /// Integers of `[lo, hi]`, thinned to at most `cap` values.
    fn ticks(lo: &Rat, hi: &Rat, cap: i64) -> Vec<i64> {
        let (Some(a), Some(b)) = (
            lo.ceil().to_integer().to_i64(),
            hi.floor().to_integer().to_i64(),
        ) else {
            return Vec::new();
        };
        if b < a {
            return Vec::new();
        }
        let step = 1 + (b - a) / cap;
        (a..=b).step_by(step as usize).collect()
    }
}

/// Renders the polygons into a standalone SVG document. The caller guarantees
/// a non-empty list.
pub fn render(polygons: &[(String, ConcavePolygon)]) -> String {
    let frame = Frame::around(polygons);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );

    // Axes: the y axis sits on the left edge; the x axis sits at data y = 0
    // when visible, else on the bottom edge.
    let zero = rat_int(0);
    let x_axis_y = if frame.ymin <= zero && zero <= frame.ymax {
        frame.my(&zero)
    } else {
        rat_int(PLOT_BOTTOM)
    };
    let _ = writeln!(
        out,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\"/>",
        dec2(&rat_int(PLOT_LEFT)),
        dec2(&x_axis_y),
        dec2(&rat_int(PLOT_RIGHT)),
        dec2(&x_axis_y)
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\"/>",
        dec2(&rat_int(PLOT_LEFT)),
        dec2(&rat_int(PLOT_TOP)),
        dec2(&rat_int(PLOT_LEFT)),
        dec2(&rat_int(PLOT_BOTTOM))
    );
    for t in Frame::ticks(&frame.xmin, &frame.xmax, 16) {
        let x = dec2(&frame.mx(&rat_int(t)));
        let y0 = dec2(&x_axis_y);
        let y1 = dec2(&(x_axis_y.clone() + rat_int(4)));
        let _ = writeln!(
            out,
            "  <line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#000000\" stroke-width=\"1\"/>"
        );
        let ty = dec2(&(x_axis_y.clone() + rat_int(16)));
        let _ = writeln!(
            out,
            "  <text x=\"{x}\" y=\"{ty}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{t}</text>"
        );
    }
    for t in Frame::ticks(&frame.ymin, &frame.ymax, 12) {
        let y = dec2(&frame.my(&rat_int(t)));
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#000000\" stroke-width=\"1\"/>",
            dec2(&rat_int(PLOT_LEFT - 4)),
            dec2(&rat_int(PLOT_LEFT))
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\" dominant-baseline=\"middle\">{t}</text>",
            dec2(&rat_int(PLOT_LEFT - 8))
        );
    }

    for (i, (_, poly)) in polygons.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points = poly
            .vertices()
            .iter()
            .map(|(x, y)| format!("{},{}", dec2(&frame.mx(x)), dec2(&frame.my(y))))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{points}\"/>"
        );
    }

    for (i, (label, _)) in polygons.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = PLOT_TOP + 22 * i as i64;
        let _ = writeln!(
            out,
            "  <rect x=\"{}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
            PLOT_RIGHT + 20
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>",
            PLOT_RIGHT + 38,
            y + 10,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertex list of one polygon, for verbose point-cloud output.
pub fn point_cloud(poly: &ConcavePolygon) -> String {
    poly.vertices()
        .iter()
        .map(|(x, y)| format!("({}, {})", fmt_rat(x), fmt_rat(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use hnslope_core::polygon::SlopeVector;

    #[test]
    fn two_decimal_rendering_rounds_half_away_from_zero() {
        use hnslope_core::rat::rat;
        assert_eq!(dec2(&rat(1, 3)), "0.33");
        assert_eq!(dec2(&rat(-1, 3)), "-0.33");
        assert_eq!(dec2(&rat(1, 200)), "0.01");
        assert_eq!(dec2(&rat(-1, 200)), "-0.01");
        assert_eq!(dec2(&rat_int(7)), "7.00");
        assert_eq!(dec2(&rat(1203, 10)), "120.30");
    }

    #[test]
    fn the_unit_staircase_polygon_maps_to_the_documented_polyline() {
        // Slopes (1, 0): vertices (0,0), (1,1), (2,1); data ranges x ∈ [0,2],
        // y ∈ [0,1] map onto the plot rectangle corners.
        let poly = SlopeVector::from_ints(&[1, 0]).to_polygon();
        let svg = render(&[("f".into(), poly)]);
        assert!(svg.contains("points=\"60.00,560.00 350.00,40.00 640.00,40.00\""));
        assert!(svg.contains("width=\"800\" height=\"600\""));
    }

    #[test]
    fn rendering_is_a_pure_function_of_the_input() {
        let a = SlopeVector::from_ints(&[2, 1, -1]).to_polygon();
        let b = SlopeVector::from_ints(&[1, 1, 0]).to_polygon();
        let polys = vec![("first".into(), a), ("second".into(), b)];
        assert_eq!(render(&polys), render(&polys));
    }

    #[test]
    fn labels_are_escaped_and_listed_in_input_order() {
        let p = SlopeVector::from_ints(&[1]).to_polygon();
        let svg = render(&[("a<b".into(), p.clone()), ("c&d".into(), p)]);
        let first = svg.find("a&lt;b").unwrap();
        let second = svg.find("c&amp;d").unwrap();
        assert!(first < second);
    }
}
