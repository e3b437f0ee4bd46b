//! Writes and reads the MXT1 tensor container, the CSV import path and the
//! MXQ1 container holding codes and scales.

use mx_emu::io::{encode_tensor, parse_csv, read_quantized, read_tensor, write_quantized, write_tensor, Dtype};
use mx_emu::{quantize, QuantConfig};

fn main() -> mx_emu::Result<()> {
    let dir = std::env::temp_dir().join(format!("mxemu-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir is writable");

    let x = parse_csv("0.5, -1.25, 3, 7\n-0.1, 0.2, -6, 2.5\n")?;
    let bytes = encode_tensor(&x, Dtype::F32)?;
    println!("MXT1 header: {:02x?}", &bytes[..6]);
    println!("{} bytes for shape {:?}", bytes.len(), x.shape());

    let path = dir.join("x.mxt");
    write_tensor(&path, &x, Dtype::F64)?;
    let (back, dtype) = read_tensor(&path)?;
    println!("read back {dtype:?}, equal: {}", back == x);

    let q = quantize(&x, &QuantConfig::from_names("fp4_e2m1_asym", "fp8e5m2", "4")?)?;
    let qpath = dir.join("x.mxq");
    write_quantized(&qpath, &q)?;
    let q2 = read_quantized(&qpath)?;
    println!("MXQ1 round trip equal: {}, dequantized {:?}", q2 == q, q2.dequantize().data());
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
