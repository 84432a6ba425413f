/** Command-line entry: render one figure from experiment CSVs.
 *
 *   node dist/render.js line-sweep OUT.svg SWEEP.csv [SWEEP.csv ...]
 *   node dist/render.js bar-comparison OUT.svg AGGREGATE.csv
 *
 * Optional flags: --title TEXT, --y-label TEXT.
 */

import { CsvFormatError } from "./csv.js";
import { FigureKind, FigureSpec, writeFigure } from "./figures.js";

function usage(): never {
  console.error(
    "usage: render <line-sweep|bar-comparison> OUT.svg CSV [CSV ...] " +
      "[--title TEXT] [--y-label TEXT]",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): FigureSpec {
  const positional: string[] = [];
  let title: string | undefined;
  let yLabel: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--title") title = argv[++i];
    else if (argv[i] === "--y-label") yLabel = argv[++i];
    else if (argv[i].startsWith("--")) usage();
    else positional.push(argv[i]);
  }
  if (positional.length < 3) usage();
  const [kind, output, ...inputs] = positional;
  if (kind !== "line-sweep" && kind !== "bar-comparison") usage();
  return { kind: kind as FigureKind, output, inputs, title, yLabel };
}

const spec = parseArgs(process.argv.slice(2));
try {
  writeFigure(spec);
  console.log(`wrote ${spec.output} from ${spec.inputs.join(", ")}`);
} catch (err) {
  if (err instanceof CsvFormatError || err instanceof Error) {
    console.error(`error: ${err.message}`);
    process.exit(1);
  }
  throw err;
}
