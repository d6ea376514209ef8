#!/usr/bin/env node
// CLI: plotgen <figure-spec-file>
//
// Exit codes: 0 all figures written, 1 some figure failed, 2 the spec
// file itself is unreadable or invalid.

import { renderSpecFile } from "./render.js";

function main(argv: string[]): number {
  if (argv.length !== 1 || argv[0] === "-h" || argv[0] === "--help") {
    console.error("usage: plotgen <figure-spec-file>");
    return argv.length === 1 ? 0 : 2;
  }

  let report;
  try {
    report = renderSpecFile(argv[0]);
  } catch (e) {
    console.error(`plotgen: ${(e as Error).message}`);
    return 2;
  }

  for (const r of report.results) {
    console.log(`wrote ${r.output}`);
  }
  for (const [output, message] of report.errors) {
    console.error(`plotgen: ${output}: ${message}`);
  }
  return report.errors.length > 0 ? 1 : 0;
}

process.exit(main(process.argv.slice(2)));
