//! Minimal SVG heat maps: one rectangle per grid cell.

use std::fmt::Write;

use pseudomode::classify::{Grid, Label};

pub const BOUNDARY_COLOR: &str = "#bdbdbd";
pub const FILLED_COLOR: &str = "#3182bd";
pub const EMPTY_COLOR: &str = "#ffffff";

/// Region colors, indexed I..VI.
pub const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

pub fn region_color(label: Label) -> &'static str {
    match Label::REGIONS.iter().position(|&r| r == label) {
        Some(i) => PALETTE[i],
        None => BOUNDARY_COLOR,
    }
}

const CELL: f64 = 6.0;
const MARGIN: f64 = 50.0;

struct Panel {
    width: f64,
    height: f64,
}

fn panel(grid: &Grid) -> Panel {
    Panel { width: CELL * grid.de_over_g.len() as f64, height: CELL * grid.gamma_over_g.len() as f64 }
}

/// Cells of one panel, row-major with `gamma/g` increasing upwards.
fn draw_cells(out: &mut String, grid: &Grid, x0: f64, colors: &[&str]) {
    let nx = grid.de_over_g.len();
    let p = panel(grid);
    for (idx, color) in colors.iter().enumerate() {
        let (i, j) = (idx % nx, idx / nx);
        let x = x0 + CELL * i as f64;
        let y = MARGIN + p.height - CELL * (j + 1) as f64;
        let _ = writeln!(out, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{color}"/>"#);
    }
}

fn draw_axes(out: &mut String, grid: &Grid, x0: f64, title: &str) {
    let p = panel(grid);
    let (de0, de1) = (grid.de_over_g[0], grid.de_over_g[grid.de_over_g.len() - 1]);
    let g1 = grid.gamma_over_g[grid.gamma_over_g.len() - 1];
    let bottom = MARGIN + p.height;
    let _ = writeln!(out, r#"<rect x="{x0}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#, p.width, p.height);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#, x0 + p.width / 2.0, MARGIN - 15.0);
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="start">{de0}</text>"#, bottom + 15.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{de1}</text>"#, x0 + p.width, bottom + 15.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">dE/g</text>"#, x0 + p.width / 2.0, bottom + 30.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{g1}</text>"#, x0 - 4.0, MARGIN + 10.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">gamma/g</text>"#, x0 - 4.0, MARGIN + p.height / 2.0);
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// Region map with a legend for I..VI and boundary cells.
pub fn region_map(grid: &Grid, labels: &[Label], title: &str) -> String {
    let p = panel(grid);
    let x0 = MARGIN + 20.0;
    let mut body = String::new();
    let colors: Vec<&str> = labels.iter().map(|&l| region_color(l)).collect();
    draw_cells(&mut body, grid, x0, &colors);
    draw_axes(&mut body, grid, x0, title);
    let lx = x0 + p.width + 20.0;
    let entries = Label::REGIONS.iter().map(|&l| (l.as_str(), region_color(l))).chain([("boundary", BOUNDARY_COLOR)]);
    for (k, (name, color)) in entries.enumerate() {
        let y = MARGIN + 18.0 * k as f64;
        let _ = writeln!(body, r#"<rect x="{lx}" y="{y}" width="12" height="12" fill="{color}" stroke="black"/>"#);
        let _ = writeln!(body, r#"<text x="{}" y="{}">{name}</text>"#, lx + 18.0, y + 10.0);
    }
    document(lx + 100.0, MARGIN + p.height + 45.0, &body)
}

/// Side-by-side filled-cell panels.
pub fn boolean_panels(grid: &Grid, panels: &[(&str, &[bool])]) -> String {
    let p = panel(grid);
    let mut body = String::new();
    let mut x0 = MARGIN + 20.0;
    for (title, filled) in panels {
        let colors: Vec<&str> = filled.iter().map(|&f| if f { FILLED_COLOR } else { EMPTY_COLOR }).collect();
        draw_cells(&mut body, grid, x0, &colors);
        draw_axes(&mut body, grid, x0, title);
        x0 += p.width + MARGIN + 20.0;
    }
    document(x0, MARGIN + p.height + 45.0, &body)
}
