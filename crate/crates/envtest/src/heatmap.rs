//! Static SVG heatmaps of test reports.
//!
//! Cells are painted with a fixed three-class palette: red where the
//! observed statistic exceeds the upper envelope, blue where it falls below
//! the lower envelope, gray inside. Axes are labeled by the original data
//! quantiles (or category labels for tables). Output depends only on the
//! report, byte for byte.

use std::fmt::Write as _;

use crate::report::{ReportGeometry, TestReport};

const CELL: usize = 14;
const MARGIN_LEFT: usize = 70;
const MARGIN_BOTTOM: usize = 46;
const MARGIN_TOP: usize = 30;
const MARGIN_RIGHT: usize = 16;

const COLOR_ABOVE: &str = "#c0392b";
const COLOR_BELOW: &str = "#2e6da4";
const COLOR_INSIDE: &str = "#d9d9d9";

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v:.4}")
    }
}

struct AxisLabels {
    x: Vec<(usize, String)>, // (cell index, label)
    y: Vec<(usize, String)>,
}

fn axis_labels(geometry: &ReportGeometry) -> AxisLabels {
    let every = |len: usize| (len / 8).max(1);
    match geometry {
        ReportGeometry::Quantile {
            values_x, values_y, ..
        } => AxisLabels {
            x: values_x
                .iter()
                .enumerate()
                .step_by(every(values_x.len()))
                .map(|(i, v)| (i, fmt_tick(*v)))
                .collect(),
            y: values_y
                .iter()
                .enumerate()
                .step_by(every(values_y.len()))
                .map(|(i, v)| (i, fmt_tick(*v)))
                .collect(),
        },
        ReportGeometry::Pixels {
            x_quantiles,
            y_quantiles,
            ..
        } => AxisLabels {
            x: x_quantiles
                .iter()
                .enumerate()
                .step_by(every(x_quantiles.len()))
                .map(|(i, v)| (i, fmt_tick(*v)))
                .collect(),
            y: y_quantiles
                .iter()
                .enumerate()
                .step_by(every(y_quantiles.len()))
                .map(|(i, v)| (i, fmt_tick(*v)))
                .collect(),
        },
        ReportGeometry::Table {
            row_labels,
            col_labels,
        } => AxisLabels {
            // table rows run along the y axis of the plot
            x: col_labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i, l.clone()))
                .collect(),
            y: row_labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i, l.clone()))
                .collect(),
        },
    }
}

/// Maps a flat statistic index to plot cell coordinates `(cx, cy)` with
/// `cy = 0` at the bottom of the plot.
fn cell_of(geometry: &ReportGeometry, k: usize) -> (usize, usize) {
    match geometry {
        // quantile fields are x-major: k = ix * gy + iy
        ReportGeometry::Quantile { values_y, .. } => {
            let gy = values_y.len();
            (k / gy, k % gy)
        }
        // pixel fields are row-major with row 0 the lowest quantile band
        ReportGeometry::Pixels { cols, .. } => (k % cols, k / cols),
        // tables are row-major; draw row 0 at the top like a printed table
        ReportGeometry::Table {
            row_labels,
            col_labels,
        } => {
            let k2 = col_labels.len();
            (k % k2, row_labels.len() - 1 - k / k2)
        }
    }
}

/// Renders the report as an SVG heatmap.
pub fn render_svg(report: &TestReport) -> String {
    let (w_cells, h_cells) = report.geometry.extent();
    let width = MARGIN_LEFT + w_cells * CELL + MARGIN_RIGHT;
    let height = MARGIN_TOP + h_cells * CELL + MARGIN_BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    let title = format!(
        "{} envelope test: p = {}/{}{}",
        match report.method {
            crate::report::ReportMethod::Cdf => "cdf",
            crate::report::ReportMethod::Qq => "qq",
            crate::report::ReportMethod::Table => "table",
        },
        report.p_erl.numerator,
        report.p_erl.denominator,
        if report.rejected { " (rejected)" } else { "" }
    );
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN_LEFT}\" y=\"18\" font-family=\"monospace\" font-size=\"12\">{title}</text>"
    );

    for k in 0..report.observed.len() {
        let (cx, cy) = cell_of(&report.geometry, k);
        let color = if report.above[k] {
            COLOR_ABOVE
        } else if report.below[k] {
            COLOR_BELOW
        } else {
            COLOR_INSIDE
        };
        let x = MARGIN_LEFT + cx * CELL;
        let y = MARGIN_TOP + (h_cells - 1 - cy) * CELL;
        let side = CELL - 1;
        let _ = writeln!(
            svg,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{side}\" height=\"{side}\" fill=\"{color}\"/>"
        );
    }

    let labels = axis_labels(&report.geometry);
    for (i, label) in &labels.x {
        let x = MARGIN_LEFT + i * CELL + CELL / 2;
        let y = MARGIN_TOP + h_cells * CELL + 14;
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"9\" \
             text-anchor=\"middle\">{label}</text>"
        );
    }
    let is_table = matches!(report.geometry, ReportGeometry::Table { .. });
    for (i, label) in &labels.y {
        // grid coordinates run bottom-up; table rows print top-down
        let row_from_top = if is_table { *i } else { h_cells - 1 - i };
        let x = MARGIN_LEFT - 6;
        let y = MARGIN_TOP + row_from_top * CELL + CELL / 2 + 4;
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"9\" \
             text-anchor=\"end\">{label}</text>"
        );
    }

    // legend
    let ly = MARGIN_TOP + h_cells * CELL + 32;
    let mut lx = MARGIN_LEFT;
    for (color, text) in [
        (COLOR_ABOVE, "above envelope"),
        (COLOR_BELOW, "below envelope"),
        (COLOR_INSIDE, "inside"),
    ] {
        let _ = writeln!(
            svg,
            "<rect x=\"{lx}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            ly - 9
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{ly}\" font-family=\"monospace\" font-size=\"10\">{text}</text>",
            lx + 14
        );
        lx += 14 + 8 * text.len() + 18;
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::Fraction;
    use crate::report::ReportMethod;

    fn tiny_report() -> TestReport {
        TestReport {
            method: ReportMethod::Qq,
            n: 10,
            s: 99,
            alpha: 0.05,
            seed: 1,
            p_erl: Fraction {
                numerator: 1,
                denominator: 100,
            },
            p_value: 0.01,
            rejected: true,
            critical_e: 0.05,
            index_set_size: 95,
            geometry: ReportGeometry::Pixels {
                rows: 2,
                cols: 2,
                x_quantiles: vec![0.3, 0.9],
                y_quantiles: vec![0.4, 1.0],
            },
            observed: vec![1.0, 2.0, 3.0, 4.0],
            lower: vec![0.5, 0.5, 0.5, 0.5],
            upper: vec![2.5, 2.5, 2.5, 2.5],
            above: vec![false, false, true, true],
            below: vec![false, false, false, false],
            atom_regions: vec![],
            wall_time_secs: 0.1,
        }
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let r = tiny_report();
        let a = render_svg(&r);
        let b = render_svg(&r);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<rect").count(), 1 + 4 + 3); // background + cells + legend
        assert_eq!(a.matches(COLOR_ABOVE).count(), 2 + 1); // two cells + legend
    }

    #[test]
    fn y_axis_labels_run_bottom_up_for_grids() {
        let r = tiny_report();
        let svg = render_svg(&r);
        // quantile 0.4 labels the bottom pixel row, 1.0 the top one
        let y_of = |needle: &str| {
            let line = svg
                .lines()
                .find(|l| {
                    l.contains(&format!(">{needle}</text>")) && l.contains("text-anchor=\"end\"")
                })
                .unwrap_or_else(|| panic!("label {needle} missing"));
            let start = line.find("y=\"").unwrap() + 3;
            let end = line[start..].find('"').unwrap() + start;
            line[start..end].parse::<usize>().unwrap()
        };
        assert!(y_of("0.4000") > y_of("1"));
    }

    #[test]
    fn above_cells_sit_in_the_top_row() {
        // flat index 2 and 3 are pixel row 1 (upper band); they must be
        // drawn above the row-0 cells.
        let r = tiny_report();
        let svg = render_svg(&r);
        let ys: Vec<usize> = svg
            .lines()
            .filter(|l| l.contains(COLOR_ABOVE) && l.contains("width=\"13\""))
            .map(|l| {
                let start = l.find("y=\"").unwrap() + 3;
                let end = l[start..].find('"').unwrap() + start;
                l[start..end].parse().unwrap()
            })
            .collect();
        let inside_ys: Vec<usize> = svg
            .lines()
            .filter(|l| l.contains(COLOR_INSIDE) && l.contains("width=\"13\""))
            .map(|l| {
                let start = l.find("y=\"").unwrap() + 3;
                let end = l[start..].find('"').unwrap() + start;
                l[start..end].parse().unwrap()
            })
            .collect();
        assert!(ys.iter().max().unwrap() < inside_ys.iter().min().unwrap());
    }
}
