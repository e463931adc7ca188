//! Plain-text matrix files: a dimension header line, then N rows of N
//! complex tokens like `0.5-0.5i`, whitespace separated.

use num_complex::Complex64;
use quwit::linalg::ComplexMatrix;

/// Parses one complex token. Accepts bare reals (`2`, `-0.5`, `1e-3`),
/// pure imaginaries (`2i`, `-i`, `1e-3i`), and full forms (`1.5-2e-4i`).
pub fn parse_complex(token: &str) -> Result<Complex64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty complex token".into());
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        let re: f64 = t
            .parse()
            .map_err(|_| format!("bad real token `{t}`"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    // split at the last sign that is not an exponent sign and not leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
            split = Some(k);
            break;
        }
    }
    let unit = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse().map_err(|_| format!("bad imaginary part in `{t}`")),
        }
    };
    match split {
        Some(k) => {
            let re: f64 = body[..k]
                .parse()
                .map_err(|_| format!("bad real part in `{t}`"))?;
            Ok(Complex64::new(re, unit(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, unit(body)?)),
    }
}

/// Renders a complex value so `parse_complex` round-trips it exactly.
pub fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Parses a whole matrix file: first line holds the dimension, the rest
/// holds dimension^2 complex tokens in row-major order.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty matrix file")?;
    let mut head_tokens = header.split_whitespace();
    let n: usize = head_tokens
        .next()
        .ok_or("missing dimension header")?
        .parse()
        .map_err(|_| format!("bad dimension header `{}`", header.trim()))?;
    if head_tokens.next().is_some() {
        return Err("dimension header holds more than one token".into());
    }
    if n == 0 {
        return Err("dimension must be positive".into());
    }
    let tokens: Vec<&str> = lines.flat_map(str::split_whitespace).collect();
    if tokens.len() != n * n {
        return Err(format!(
            "expected {} entries for a {n}x{n} matrix, found {}",
            n * n,
            tokens.len()
        ));
    }
    let mut data = Vec::with_capacity(n * n);
    for tok in tokens {
        data.push(parse_complex(tok)?);
    }
    ComplexMatrix::from_vec(n, n, data).map_err(|e| e.to_string())
}

/// Writes a matrix in the file format `parse_matrix` reads.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_complex(m.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
