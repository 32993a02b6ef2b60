#!/usr/bin/env python3
"""
Soft Mellowmax Experiment CLI

Command-line interface to the experiment harness. Every flag has a config
file equivalent; flags override the file.

Usage:
    python smx_cli.py bounds --alpha 10 --omega 5 --gamma 0.9 --n-actions 10
    python smx_cli.py contract --config experiment_configs/contract_counterexample.cfg
    python smx_cli.py plan --mdp experiment_configs/mdp/chain_5.yaml --alpha 10 --omega 5
    python smx_cli.py qlearn --config experiment_configs/qlearn.cfg --svg results/bias.svg
    python smx_cli.py overest --alpha 10 --omega 5 --n-actions 10 --samples 1000000
    python smx_cli.py marl-overest --omega 5 --alpha 10 --n-agents 3
    python smx_cli.py sweep --config experiment_configs/sweep.cfg --out results/sweep.csv

Exit codes:
    0  success
    1  usage or configuration error
    2  numerical failure at runtime
    3  an acceptance check in the results failed
"""

import sys
from pathlib import Path

# Add current directory to path to access modules
sys.path.append(str(Path(__file__).parent.absolute()))

import argparse
from typing import List, Optional

from config.config_factory import COMMANDS, config_factory
from core.errors import ConfigError, DomainError, MdpValidationError, NumericalError, ParameterError, SmxError
from core.logs import get_logger
from runner import ExperimentRunner, failed_checks

logger = get_logger("smx")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_CHECK_FAILED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smx",
        description="Soft Mellowmax operator experiments: bounds, contraction scans, planning, "
                    "Q-learning and Monte Carlo overestimation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s bounds --alpha 10 --omega 5 --gamma 0.9 --n-actions 10
  %(prog)s contract --alpha 1 --omega 1 --config experiment_configs/contract_counterexample.cfg
  %(prog)s plan --mdp experiment_configs/mdp/chain_5.yaml --alpha 10 --omega 5 --svg residual.svg
  %(prog)s overest --alpha 10 --omega 5 --n-actions 10 --samples 1000000
  %(prog)s sweep --config experiment_configs/sweep.cfg --out sweep.csv
        """
    )
    parser.add_argument('command', choices=COMMANDS, help='Experiment to run')
    parser.add_argument('--config', help='Experiment config file (key = value with [section] headers)')
    parser.add_argument('--alpha', type=float, help='SM2 alpha ([operator] alpha)')
    parser.add_argument('--omega', type=float, help='Operator omega ([operator] omega)')
    parser.add_argument('--gamma', type=float, help='Discount factor ([mdp] gamma)')
    parser.add_argument('--rmax', type=float, help='Reward bound ([mdp] r_max)')
    parser.add_argument('--n-actions', type=int, help='Actions per state ([montecarlo] / [contract] n_actions)')
    parser.add_argument('--n-agents', type=int, help='Number of agents ([montecarlo] n_agents)')
    parser.add_argument('--epsilon', type=float, help='Error half-width ([montecarlo] epsilon)')
    parser.add_argument('--samples', type=int, help='Monte Carlo samples ([montecarlo] samples)')
    parser.add_argument('--seed', type=int, help='Random seed ([experiment] seed)')
    parser.add_argument('--tol', type=float, help='Solver tolerance ([solve] tol)')
    parser.add_argument('--mdp', help='MDP file ([mdp] file)')
    parser.add_argument('--out', help='CSV output path ([experiment] out); stdout when omitted')
    parser.add_argument('--svg', help='SVG curve output path ([experiment] svg)')
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    """Map CLI flags onto (section, key) config entries; unset flags are None."""
    return {
        ("operator", "alpha"): args.alpha,
        ("operator", "omega"): args.omega,
        ("mdp", "gamma"): args.gamma,
        ("mdp", "r_max"): args.rmax,
        ("montecarlo", "n_actions"): args.n_actions,
        ("contract", "n_actions"): args.n_actions,
        ("montecarlo", "n_agents"): args.n_agents,
        ("montecarlo", "epsilon"): args.epsilon,
        ("montecarlo", "samples"): args.samples,
        ("experiment", "seed"): args.seed,
        ("solve", "tol"): args.tol,
        ("mdp", "file"): args.mdp,
        ("experiment", "out"): args.out,
        ("experiment", "svg"): args.svg,
    }


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits with 0, usage errors with 2; usage errors map to 1 here
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        config = config_factory.create_experiment_config(args.command, args.config, overrides_from_args(args))
        records = ExperimentRunner(config).execute()
    except KeyboardInterrupt:
        print("\n⚠️  Process interrupted by user", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ParameterError, MdpValidationError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (NumericalError, DomainError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except SmxError as e:
        logger.error("%s", e)
        return EXIT_NUMERICAL
    except Exception as e:
        logger.exception("Unexpected error: %s", e)
        return EXIT_NUMERICAL

    failed = failed_checks(records)
    if failed:
        for record in failed:
            logger.error("Check failed: %s = %s (bound %s)", record.metric, record.value, record.bound)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
