//! Parse a build-metric CSV and put it in date order.
//!
//! ```bash
//! cargo run -p buildcast --example parse_and_sort
//! ```

use buildcast::stream::{parse_stream, StreamSchema};

const CSV: &str = "\
date,m1,m2,outcome
2013-03-05T09:15:00,12.5,3,failure
2013-01-02T08:00:00,10.0,1,success
2013-01-02T08:00:00,11.0,2,failure
2013-02-14T17:30:00,9.5,4,success
";

fn main() -> buildcast::Result<()> {
    let schema = StreamSchema::new(vec!["m1".into(), "m2".into()], "date", "outcome")?;
    let stream = parse_stream(CSV.as_bytes(), &schema)?;
    let (success, failure) = stream.class_counts();
    println!("parsed {} rows: {success} success / {failure} failure", stream.len());

    let sorted = stream.sort_by_date();
    println!("date order (ties keep input order):");
    for inst in sorted.iter() {
        println!("  {}  {}  {:?}", inst.id, inst.date, inst.outcome);
    }

    // Malformed cells are reported with their row number.
    let bad = "date,m1,m2,outcome\n2013-01-01T00:00:00,1,2,maybe\n";
    let err = parse_stream(bad.as_bytes(), &schema).unwrap_err();
    println!("bad outcome token rejected: {err}");
    Ok(())
}
