// Brute-force SSIM used as an independent reference.

use vmt_core::image::Image;

// Direct double loop: 2-D Gaussian weights from exp(), centered moments.
pub fn naive_mssim(a: &Image, b: &Image) -> f64 {
    let luma = |img: &Image, x: u32, y: u32| {
        let [r, g, b] = img.get(x, y);
        0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
    };
    let (win, sigma) = (11i64, 1.5f64);
    let half = win / 2;
    let mut weights = vec![vec![0.0; win as usize]; win as usize];
    let mut total = 0.0;
    for v in 0..win {
        for u in 0..win {
            let (du, dv) = ((u - half) as f64, (v - half) as f64);
            let w = (-(du * du + dv * dv) / (2.0 * sigma * sigma)).exp();
            weights[v as usize][u as usize] = w;
            total += w;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let (w, h) = (a.width() as i64, a.height() as i64);
    let mut sum = 0.0;
    let mut n = 0usize;
    for y0 in 0..=(h - win) {
        for x0 in 0..=(w - win) {
            let (mut mx, mut my) = (0.0, 0.0);
            for v in 0..win {
                for u in 0..win {
                    let wt = weights[v as usize][u as usize] / total;
                    mx += wt * luma(a, (x0 + u) as u32, (y0 + v) as u32);
                    my += wt * luma(b, (x0 + u) as u32, (y0 + v) as u32);
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for v in 0..win {
                for u in 0..win {
                    let wt = weights[v as usize][u as usize] / total;
                    let dx = luma(a, (x0 + u) as u32, (y0 + v) as u32) - mx;
                    let dy = luma(b, (x0 + u) as u32, (y0 + v) as u32) - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cxy += wt * dx * dy;
                }
            }
            sum += ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            n += 1;
        }
    }
    sum / n as f64
}
