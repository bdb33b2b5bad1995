#!/usr/bin/env python3
"""
sygsolve - syntax-guided synthesis solver
Main entry point for the application.
"""

import logging
import sys
from typing import Optional

import click

from handlers.config_handler import ConfigHandler
from handlers.solution_printer import print_solution
from handlers.stats_handler import SolverStats
from handlers.sygus_parser import load_problem
from models.exceptions import SygusError
from models.solver_config import STRATEGIES
from services.strategy_dispatcher import Strategy, StrategyDispatcher

EXIT_INPUT_ERROR = 2


def report_error(message: str) -> None:
    """Diagnostic on stderr as an SMT-LIB error response"""
    escaped = message.replace('"', '""')
    click.echo(f'(error "{escaped}")', err=True)


def read_input(input_file: Optional[str]) -> str:
    if input_file:
        with open(input_file, 'r', encoding='utf-8') as file:
            return file.read()
    return click.get_text_stream('stdin').read()


def solve(input_file: Optional[str], config_handler: ConfigHandler, show_stats: bool) -> int:
    """
    Parse, dispatch and print one problem

    Returns:
        int: process exit code
    """
    config = config_handler.solver_config
    try:
        problem = load_problem(read_input(input_file))
    except SygusError as err:
        logging.error(f"Rejected input: {err}")
        report_error(str(err))
        return EXIT_INPUT_ERROR

    stats = SolverStats()
    dispatcher = StrategyDispatcher(config, stats)
    result = dispatcher.dispatch(problem, Strategy(config.strategy))
    click.echo(print_solution(problem, result), nl=False)

    if show_stats:
        for line in stats.as_lines():
            click.echo(line, err=True)
    return result.exit_code


@click.command()
@click.argument('input_file', required=False, type=click.Path(exists=True, dir_okay=False))
@click.option('--strategy', type=click.Choice(STRATEGIES), default=None,
              help='Synthesis strategy (default: auto)')
@click.option('--timeout-ms', type=click.IntRange(min=1), default=None,
              help='Wall-clock budget in milliseconds')
@click.option('--max-size', type=click.IntRange(min=1), default=None,
              help='Largest candidate term size')
@click.option('--verify-bound', type=click.IntRange(min=1), default=None,
              help='Integer bound of the bounded verification domain')
@click.option('--seed', type=int, default=None, help='Seed for sampled points')
@click.option('--stats', 'show_stats', is_flag=True, help='Print key=value counters on stderr')
@click.option('--quiet', is_flag=True, help='Only log errors')
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
              help='INI configuration file')
def main(input_file: Optional[str], strategy: Optional[str], timeout_ms: Optional[int],
         max_size: Optional[int], verify_bound: Optional[int], seed: Optional[int],
         show_stats: bool, quiet: bool, config_file: Optional[str]):
    """
    Solve the SyGuS-IF problem in INPUT_FILE (or standard input).

    Prints define-fun solutions, infeasible or unknown. Exit status is 0 for
    a solution or infeasible, 1 for unknown and 2 for invalid input.
    """
    overrides = {
        'strategy': strategy,
        'timeout_ms': timeout_ms,
        'max_size': max_size,
        'int_bound': verify_bound,
        'seed': seed,
        'quiet': True if quiet else None,
    }
    try:
        config_handler = ConfigHandler(config_file, overrides)
    except SygusError as err:
        report_error(str(err))
        sys.exit(EXIT_INPUT_ERROR)

    try:
        code = solve(input_file, config_handler, show_stats)
    except Exception as err:
        logging.exception("\n****** CRASHED ******\n%s", err)
        report_error(f"internal error: {err}")
        code = EXIT_INPUT_ERROR
    sys.exit(code)


if __name__ == '__main__':
    main()
