//! Minimal self-contained SVG plots: log-rate curves for sweeps and a
//! colored grid for coverage maps.  No drawing dependencies; legibility
//! over looks.

use crate::experiment::coverage::CoverageTable;
use crate::experiment::table::ResultTable;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    Ber,
    Ser,
}

impl PlotMetric {
    fn y_label(self) -> &'static str {
        match self {
            PlotMetric::Ber => "bit error rate",
            PlotMetric::Ser => "symbol error rate",
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders one sweep table as a log-y curve plot.  Zero rates cannot be
/// placed on a log axis and are left out of their polyline.
pub fn render_rate_plot(
    table: &ResultTable,
    metric: PlotMetric,
    x_label: &str,
    title: &str,
) -> String {
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let rate = match metric {
            PlotMetric::Ber => row.ber(),
            PlotMetric::Ser => row.ser(),
        };
        let label = row.curve_label();
        match curves.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((row.sweep_value, rate)),
            None => curves.push((label, vec![(row.sweep_value, rate)])),
        }
    }

    let width = 760.0;
    let height = 480.0;
    let (left, right, top, bottom) = (70.0, 190.0, 40.0, 55.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        left + plot_w / 2.0,
        escape(title)
    );

    let xs: Vec<f64> = table.rows.iter().map(|r| r.sweep_value).collect();
    let min_pos = curves
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if xs.is_empty() || !min_pos.is_finite() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">no nonzero rates to plot</text>",
            width / 2.0,
            height / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if x_min == x_max {
        (x_min - 0.5, x_max + 0.5)
    } else {
        (x_min, x_max)
    };
    let dec_lo = min_pos.log10().floor() as i32;
    let dec_hi = 0i32;
    let x_of = |x: f64| left + plot_w * (x - x_min) / (x_max - x_min);
    let y_of = |rate: f64| {
        let span = f64::from(dec_hi - dec_lo).max(1.0);
        top + plot_h * (f64::from(dec_hi) - rate.log10()) / span
    };

    // Decade gridlines and y tick labels.
    for dec in dec_lo..=dec_hi {
        let y = y_of(10f64.powi(dec));
        let _ = writeln!(
            svg,
            "<line x1=\"{left}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>",
            left + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{dec}</text>",
            left - 8.0,
            y + 4.0
        );
    }

    // X ticks on swept values, thinned when crowded.
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(|a, b| a.partial_cmp(b).expect("finite sweep values"));
    ticks.dedup();
    let step = ticks.len().div_ceil(12);
    for x in ticks.iter().step_by(step.max(1)) {
        let px = x_of(*x);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>",
            top,
            top + plot_h
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x}</text>",
            top + plot_h + 18.0
        );
    }

    // Axes.
    let _ = writeln!(
        svg,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        left + plot_w / 2.0,
        height - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(metric.y_label())
    );

    // Curves and legend.
    for (ci, (label, pts)) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let visible: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).copied().collect();
        let path: Vec<String> = visible
            .iter()
            .map(|&(x, r)| format!("{:.1},{:.1}", x_of(x), y_of(r)))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            );
        }
        for &(x, r) in &visible {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                x_of(x),
                y_of(r)
            );
        }
        let ly = top + 14.0 + 18.0 * ci as f64;
        let lx = left + plot_w + 16.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 28.0,
            ly + 4.0,
            escape(label)
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Linear interpolation between two colors given as (r, g, b).
fn lerp_color(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let ch = |x: u8, y: u8| (f64::from(x) + (f64::from(y) - f64::from(x)) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(a.0, b.0),
        ch(a.1, b.1),
        ch(a.2, b.2)
    )
}

/// Renders a coverage table as a colored cell grid with the transmitter
/// and array positions marked.  Low log-SER is blue, high is red, skipped
/// cells are gray.
pub fn render_coverage_map(table: &CoverageTable) -> String {
    let grid = table.grid;
    let values: Vec<f64> = table.cells.iter().map(|c| c.log10_ser()).collect();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let v_min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (v_max - v_min).max(1e-9);

    let cell_w = if grid.nx > 1 {
        (grid.x_max - grid.x_min) / (grid.nx - 1) as f64
    } else {
        1.0
    };
    let cell_h = if grid.ny > 1 {
        (grid.y_max - grid.y_min) / (grid.ny - 1) as f64
    } else {
        1.0
    };
    let plot_w = 640.0;
    let scale = plot_w / ((grid.x_max - grid.x_min) + cell_w);
    let plot_h = ((grid.y_max - grid.y_min) + cell_h) * scale;
    let (left, top) = (60.0, 40.0);
    let width = left + plot_w + 160.0;
    let height = top + plot_h + 60.0;
    // Map scenario coordinates to pixels, y up.
    let px = |x: f64| left + (x - (grid.x_min - cell_w / 2.0)) * scale;
    let py = |y: f64| top + ((grid.y_max + cell_h / 2.0) - y) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">symbol error rate \
         (log10) by tag position</text>",
        left + plot_w / 2.0
    );

    let cold = (44, 123, 182);
    let hot = (215, 25, 28);
    for (cell, &v) in table.cells.iter().zip(&values) {
        let fill = if v.is_finite() {
            lerp_color(cold, hot, (v - v_min) / spread)
        } else {
            "#bbbbbb".to_string()
        };
        let _ = writeln!(
            svg,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\"/>",
            px(cell.x - cell_w / 2.0),
            py(cell.y + cell_h / 2.0),
            cell_w * scale,
            cell_h * scale
        );
    }

    // Node markers; the array may sit outside the grid, clamp is not
    // needed because the viewBox is already larger than the plot area.
    let tx = [-table.d01 / 2.0, 0.0];
    let rx = [table.d01 / 2.0, 0.0];
    for (pos, name) in [(tx, "tx"), (rx, "rx")] {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"black\"/>",
            px(pos[0]),
            py(pos[1])
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{name}</text>",
            px(pos[0]),
            py(pos[1]) + 16.0
        );
    }

    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">x (wavelengths)</text>",
        left + plot_w / 2.0,
        top + plot_h + 40.0
    );

    // Color bar.
    let bar_x = left + plot_w + 30.0;
    let bar_h = plot_h.min(200.0);
    let steps = 24;
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{bar_x:.1}\" y=\"{:.1}\" width=\"18\" height=\"{:.1}\" fill=\"{}\"/>",
            top + bar_h * (1.0 - t),
            bar_h / steps as f64 + 1.0,
            lerp_color(cold, hot, t)
        );
    }
    if v_min.is_finite() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\">{v_max:.2}</text>",
            bar_x + 24.0,
            top + 10.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\">{v_min:.2}</text>",
            bar_x + 24.0,
            top + bar_h
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Modulation;
    use crate::experiment::coverage::{CoverageCell, GridSpec};
    use crate::experiment::runner::Counts;
    use crate::experiment::table::ResultRow;
    use crate::receiver::Variant;

    fn sample_table() -> ResultTable {
        let mut rows = Vec::new();
        for (v, m) in [
            (Variant::Lr, Modulation::Bpsk),
            (Variant::Energy, Modulation::Ook),
        ] {
            for (i, sweep) in [40.0, 44.0, 48.0].into_iter().enumerate() {
                rows.push(ResultRow {
                    sweep_value: sweep,
                    variant: v,
                    modulation: m,
                    bits: 1000,
                    bit_errors: [120, 30, 4][i],
                    symbols: 1000,
                    symbol_errors: [120, 30, 4][i],
                });
            }
        }
        ResultTable::new(rows, 1, 2)
    }

    #[test]
    fn plot_draws_every_curve() {
        let svg = render_rate_plot(&sample_table(), PlotMetric::Ber, "ambient SNR (dB)", "demo");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("lr/bpsk") && svg.contains("energy/ook"));
        assert!(
            svg.contains("1e-3"),
            "decade labels reach the smallest rate"
        );
        assert!(!svg.contains("NaN"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn zero_rates_drop_out_of_the_polyline() {
        let mut table = sample_table();
        table.rows[2].bit_errors = 0;
        let svg = render_rate_plot(&table, PlotMetric::Ber, "x", "t");
        assert_eq!(
            svg.matches("<circle").count(),
            5,
            "zero-rate point is omitted"
        );
    }

    #[test]
    fn all_zero_table_renders_a_placeholder() {
        let mut table = sample_table();
        for row in &mut table.rows {
            row.bit_errors = 0;
            row.symbol_errors = 0;
        }
        let svg = render_rate_plot(&table, PlotMetric::Ser, "x", "t");
        assert!(svg.contains("no nonzero rates"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_rate_plot(&sample_table(), PlotMetric::Ber, "a < b & c", "t");
        assert!(svg.contains("a &lt; b &amp; c"));
    }

    #[test]
    fn coverage_map_colors_every_cell() {
        let cells = vec![
            CoverageCell {
                x: -2.0,
                y: 0.0,
                counts: Some(Counts {
                    bits: 10,
                    bit_errors: 9,
                    symbols: 10,
                    symbol_errors: 9,
                }),
            },
            CoverageCell {
                x: 2.0,
                y: 0.0,
                counts: Some(Counts {
                    bits: 10,
                    bit_errors: 1,
                    symbols: 10,
                    symbol_errors: 1,
                }),
            },
            CoverageCell {
                x: -2.0,
                y: 2.0,
                counts: None,
            },
            CoverageCell {
                x: 2.0,
                y: 2.0,
                counts: Some(Counts {
                    bits: 10,
                    bit_errors: 0,
                    symbols: 10,
                    symbol_errors: 0,
                }),
            },
        ];
        let table = CoverageTable {
            cells,
            grid: GridSpec {
                x_min: -2.0,
                x_max: 2.0,
                nx: 2,
                y_min: 0.0,
                y_max: 2.0,
                ny: 2,
            },
            d01: 8.0,
            n_r: 2,
            master_seed: 0,
        };
        let svg = render_coverage_map(&table);
        assert!(svg.contains("#bbbbbb"), "skipped cell is gray");
        assert!(svg.contains(">tx<") && svg.contains(">rx<"));
        // 4 cells + color bar rects + background.
        assert!(svg.matches("<rect").count() >= 5 + 24);
        assert!(svg.ends_with("</svg>\n"));
    }
}
