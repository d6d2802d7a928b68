//! Shape-space stasis domain of a homogeneous three-point crawler.
//!
//! With strongly anisotropic friction the domain is a triangle and every edge
//! pushes forward; closer to isotropy it becomes a hexagon whose edges
//! alternate between forward and backward motion.

use crawler_ris::dissipation::DissipationSpec;
use crawler_ris::scenario::polygon_plotdata;
use crawler_ris::stasis::build_geometry;

fn main() -> crawler_ris::Result<()> {
    for (mu_minus, mu_plus) in [(3.0, 1.0), (1.3, 1.0), (1.0, 3.0)] {
        let g = build_geometry(&DissipationSpec::homogeneous(3, mu_minus, mu_plus), 0.0)?;
        println!("μ₋ = {mu_minus}, μ₊ = {mu_plus}: {} vertices", g.vertices.len());
        for (f, face) in g.facets.iter().enumerate() {
            let a = &g.vertices[face.vertices[0]];
            let b = &g.vertices[face.vertices[1]];
            println!(
                "  edge {f}: ({:+.2}, {:+.2}) -> ({:+.2}, {:+.2})  v_m {}",
                a[0],
                a[1],
                b[0],
                b[1],
                face.label.symbol()
            );
        }
        if let Some(dat) = polygon_plotdata(&g) {
            println!("  polygon:\n{}", dat.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n"));
        }
    }
    Ok(())
}
