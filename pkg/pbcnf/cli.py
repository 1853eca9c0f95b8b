"""CLI translating an OPB file into DIMACS CNF or normalized OPB"""

from dataclasses import dataclass
import pathlib
from typing import Optional

import click

from pbcnf.encoders import EncoderName
from pbcnf.logger import get_logger
from pbcnf.output import OutputKind, new_output_problem
from pbcnf.parsers import parse_opb, to_input_model

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSAT = 20

DEFAULT_ENCODERS = {
    OutputKind.DIMACS: EncoderName.BDD,
    OutputKind.OPB: EncoderName.PB,
}


@dataclass(frozen=True)
class CliConfig:
    """
    One translation run. Either a single `encoder` applied to every
    constraint (all tagged 1) or `tag_bindings`, where constraint i of the
    file carries tag i.
    """

    input_path: Optional[pathlib.Path] = None
    output_kind: OutputKind = OutputKind.DIMACS
    encoder: Optional[str] = None
    tag_bindings: tuple[tuple[int, tuple[str, ...]], ...] = ()
    stats: bool = False
    comments: bool = False

    @property
    def default_encoder(self) -> str:
        return self.encoder or DEFAULT_ENCODERS[OutputKind(self.output_kind)].value


@dataclass
class RunResult:
    exit_code: int
    output: str = ""
    diagnostics: str = ""


def parse_tag_binding(text: str) -> tuple[int, tuple[str, ...]]:
    """'3=bdd,adder' -> (3, ('bdd', 'adder'))"""
    tag, sep, names = text.partition("=")
    encoder_names = tuple(name.strip() for name in names.split(",") if name.strip())
    if not sep or not tag.strip().isdigit() or not encoder_names:
        raise ValueError(f"Invalid tag binding '{text}', expected T=NAME[,NAME...]")
    return int(tag), encoder_names


def _stats_block(frame, prefix: str) -> str:
    lines = frame.to_csv(None, index=False).splitlines()
    return "".join(f"{prefix} {line}\n" for line in lines)


def _config_error(msg: str) -> ValueError:
    logger.error(msg)
    return ValueError(msg)


def run(config: CliConfig, text: Optional[str] = None) -> RunResult:
    """
    parse -> model -> encoder assignment -> translation -> output text.
    `text` overrides reading from config.input_path / standard input.
    Errors are logged where they are raised.
    """
    kind = OutputKind(config.output_kind)
    try:
        if config.encoder and config.tag_bindings:
            raise _config_error(
                "A single encoder and per-tag bindings are mutually exclusive"
            )
        if text is None:
            if config.input_path is None:
                text = click.get_text_stream("stdin").read()
            else:
                try:
                    text = pathlib.Path(config.input_path).read_text()
                except OSError as err:
                    logger.error(f"Could not read {config.input_path}: {err}")
                    raise
        doc = parse_opb(text)
        per_tag = bool(config.tag_bindings)
        m = to_input_model(doc, tag_by_position=per_tag)

        out = new_output_problem(kind)
        if per_tag:
            for tag, names in config.tag_bindings:
                if not 1 <= tag <= len(doc.constraints):
                    raise _config_error(
                        f"Tag {tag} references no constraint "
                        f"(the input has {len(doc.constraints)})"
                    )
                for name in names:
                    out.assign_encoder(tag, name)
        else:
            out.assign_encoder(1, config.default_encoder)
        out.read(m)
        output = out.get_output(comments=config.comments)
    except (ValueError, RuntimeError, OSError) as err:
        logger.debug(f"Translation stopped: {type(err).__name__}")
        return RunResult(EXIT_ERROR, diagnostics=f"error: {err}\n")

    diagnostics = ""
    if config.stats:
        prefix = "c" if kind is OutputKind.DIMACS else "*"
        diagnostics += _stats_block(out.stats_frame(), prefix)
    if out.unsat_constraints:
        indices = ",".join(str(i) for i in out.unsat_constraints)
        diagnostics += f"unsatisfiable constraints found while translating: {indices}\n"
        return RunResult(EXIT_UNSAT, output, diagnostics)
    return RunResult(EXIT_OK, output, diagnostics)


@click.command()
@click.option(
    "--input",
    "input_path",
    required=False,
    type=click.Path(
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        path_type=pathlib.Path,
    ),
    help="OPB file to translate (default: standard input)",
)
@click.option(
    "--output-kind",
    required=False,
    default=OutputKind.DIMACS.value,
    type=click.Choice(OutputKind, case_sensitive=False),
    help="Output format (default: dimacs)",
)
@click.option(
    "--encoder",
    required=False,
    type=str,
    help="Encoder for every constraint: direct, bdd, adder, watchdog, bargraph or pb "
    "(default: bdd for dimacs, pb for opb)",
)
@click.option(
    "--tag",
    "tags",
    multiple=True,
    type=str,
    help="T=NAME[,NAME...]: encoders for the T-th constraint of the file. Repeatable.",
)
@click.option(
    "--stats", is_flag=True, help="Write per-constraint output sizes to stderr"
)
@click.option(
    "--comments", is_flag=True, help="Prefix the output with per-constraint comments"
)
def pb_encode(input_path, output_kind, encoder, tags, stats, comments):
    """
    Translate pseudo-Boolean constraints read in OPB format.
    The translated problem goes to standard output, statistics and errors
    to standard error. Exit status is 1 on errors and 20 when a constraint
    is found unsatisfiable during translation (the formula is still written).
    """
    if encoder and tags:
        raise click.UsageError("--encoder and --tag are mutually exclusive")
    try:
        bindings = tuple(parse_tag_binding(tag) for tag in tags)
    except ValueError as err:
        raise click.UsageError(str(err))

    config = CliConfig(
        input_path=input_path,
        output_kind=OutputKind(output_kind),
        encoder=encoder,
        tag_bindings=bindings,
        stats=stats,
        comments=comments,
    )
    result = run(config)
    click.echo(result.output, nl=False)
    if result.diagnostics:
        click.echo(result.diagnostics, err=True, nl=False)
    raise SystemExit(result.exit_code)
