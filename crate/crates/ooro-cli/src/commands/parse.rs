use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use ooro_core::parse::parse_response_with_names;
use ooro_core::scene::CategoryList;

#[derive(Args)]
pub struct ParseArgs {
    /// File holding the raw response text
    #[arg(long)]
    pub response: PathBuf,

    /// The scene's category CSV line, e.g. "clock 0,clock 1,building 0"
    #[arg(long)]
    pub categories: String,
}

pub fn run(args: ParseArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.response)
        .with_context(|| format!("reading {}", args.response.display()))?;
    let names = CategoryList::from_csv_line(&args.categories)?;
    let (relations, report) = parse_response_with_names(&text, &names);
    let output = serde_json::json!({
        "signed": relations.to_signed(),
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(0)
}
