// The first Sobol points, random access, and per-run block partitions.

use hlv_qmc::uniform::SobolGenerator;
use hlv_qmc::{DirectionNumbers, UniformStream};

pub fn run_example() -> hlv_qmc::Result<()> {
    let table = DirectionNumbers::builtin();
    println!("built-in table covers {} dimensions", table.max_dimension());

    let mut stream = UniformStream::sobol(&table, 4)?;
    for _ in 0..8 {
        let i = stream.cursor();
        println!("{i:>3}: {:?}", stream.next_point()?);
    }

    let generator = SobolGenerator::new(&table, 4)?;
    println!("index 1000 directly: {:?}", generator.point(1000)?);

    let run3 = stream.partition(3, 1024)?;
    println!("run 3 starts at index {}", run3.cursor());
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
