"""
Command Line Interface for the swell shallow water benchmarks
"""
import argparse
import logging
import math
import sys

from colorama import Fore, Style, init as colorama_init
from dotenv import load_dotenv
from tabulate import tabulate

from src.cases import CASES
from src.config import default_config, load_config, log_level
from src.exceptions import ConfigError, NumericalFault, SwellError
from src.simulation import Simulation, convergence

load_dotenv()

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAULT = 2


def main(argv=None) -> int:
    """Main CLI entry point"""
    parser = argparse.ArgumentParser(
        description='Well-balanced high-order shallow water solver benchmarks'
    )
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run a configured simulation')
    run_parser.add_argument('config', help='key=value configuration file')

    # Converge command
    converge_parser = subparsers.add_parser('converge', help='Measure convergence orders over meshes')
    converge_parser.add_argument('config', help='key=value configuration file')
    converge_parser.add_argument('--meshes', default='20,40,80', help='Comma-separated cell counts along x')

    # List command
    subparsers.add_parser('list-cases', help='List benchmark cases')

    # Print config command
    print_parser = subparsers.add_parser('print-config', help='Print the default configuration of a case')
    print_parser.add_argument('case', help='Case name')
    print_parser.add_argument('--degree', type=int, default=0, help='Reconstruction degree')

    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    logging.basicConfig(level=log_level(), format='%(asctime)s %(name)s %(levelname)s %(message)s')
    colorama_init()

    try:
        if args.command == 'run':
            config = load_config(args.config)
            result = Simulation(config).run()
            print_run_result(config, result)

        elif args.command == 'converge':
            config = load_config(args.config)
            meshes = parse_meshes(args.meshes)
            table = convergence(config, meshes)
            print_convergence(config, table)

        elif args.command == 'list-cases':
            print_cases()

        elif args.command == 'print-config':
            for line in default_config(args.case, args.degree).to_lines():
                print(line)

    except NumericalFault as exc:
        print(f"\n{Fore.RED}💥 Numerical fault: {exc}{Style.RESET_ALL}\n")
        return EXIT_FAULT
    except SwellError as exc:
        print(f"\n{Fore.RED}❌ Configuration error: {exc}{Style.RESET_ALL}\n")
        return EXIT_CONFIG

    return EXIT_OK


def parse_meshes(text: str):
    try:
        meshes = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"--meshes must be comma-separated integers, got '{text}'") from None
    if any(n < 1 for n in meshes):
        raise ConfigError(f"mesh sizes must be positive, got {meshes}")
    return meshes


def _fmt(value) -> str:
    if isinstance(value, float):
        return 'nan' if math.isnan(value) else f"{value:.3e}"
    return str(value)


def print_run_result(config, result):
    """Print run result"""
    print(f"\n{Fore.GREEN}✅ {config.case} finished{Style.RESET_ALL}\n")
    print(f"⏱️  t={result.fields.time:.6g} s in {result.steps} steps ({result.wall_time:.2f} s wall)")
    print(f"💧 Minimum height: {result.min_height:.3e}")

    if result.report is not None:
        print(f"\n📊 Errors:\n")
        print(tabulate(result.report.to_frame(), headers='keys', floatfmt='.3e', tablefmt='github'))

    if result.features is not None:
        print(f"\n🌊 Wave features:\n")
        rows = [(name, _fmt(value)) for name, value in result.features.as_dict().items()]
        print(tabulate(rows, headers=['feature', 'value'], tablefmt='github'))

    if result.snapshots:
        print(f"\n📁 Wrote {len(result.snapshots)} files to {config.out_dir}")
    print()


def print_convergence(config, table):
    """Print convergence table"""
    print(f"\n{Fore.CYAN}📈 Convergence for {config.case}, degree {config.degree}{Style.RESET_ALL}\n")
    print(tabulate(table, headers='keys', floatfmt='.3e', tablefmt='github', showindex=False))
    print()


def print_cases():
    """Print the case registry"""
    rows = [
        (case.name, f"{case.nx}x{case.ny}", case.t_end, case.k_manning, case.description)
        for case in CASES.values()
    ]
    print(tabulate(rows, headers=['case', 'mesh', 't_end', 'k', 'description'], tablefmt='github'))


if __name__ == '__main__':
    sys.exit(main())
