"""
Tests for the command line interface
"""
import pandas as pd
import pytest

import cli
from src.exceptions import NumericalFault
from src.simulation import Simulation


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('case=lake_at_rest_cone\nnx=6\nny=6\nt_end=0.005\n')
    return path


class TestCommands:
    """Test the subcommands and their exit codes"""

    def test_list_cases(self, capsys):
        """Test the case table is printed"""
        assert cli.main(['list-cases']) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert 'partial_dam_break' in out
        assert 'goutal_maurel' in out

    def test_print_config(self, capsys):
        """Test resolved defaults are printed as key=value lines"""
        assert cli.main(['print-config', 'steady_vortex', '--degree', '3']) == cli.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert 'degree=3' in lines
        assert 'mood=true' in lines

    def test_print_unknown_case(self, capsys):
        """Test an unknown case is a configuration error"""
        assert cli.main(['print-config', 'tsunami']) == cli.EXIT_CONFIG
        assert 'Configuration error' in capsys.readouterr().out

    def test_run(self, config_file, capsys):
        """Test a short run prints its errors"""
        assert cli.main(['run', str(config_file)]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert 'lake_at_rest_cone finished' in out
        assert 'eta' in out

    def test_run_missing_file(self, tmp_path):
        """Test a missing configuration file exits with the configuration code"""
        assert cli.main(['run', str(tmp_path / 'absent.cfg')]) == cli.EXIT_CONFIG

    def test_run_fault(self, config_file, mocker, capsys):
        """Test numerical faults exit with their own code"""
        mocker.patch.object(Simulation, 'run', side_effect=NumericalFault('negative height', time=0.1))
        assert cli.main(['run', str(config_file)]) == cli.EXIT_FAULT
        assert 'Numerical fault' in capsys.readouterr().out

    def test_converge_bad_meshes(self, config_file):
        """Test malformed mesh lists are refused"""
        assert cli.main(['converge', str(config_file), '--meshes', '10,x']) == cli.EXIT_CONFIG

    def test_converge(self, config_file, mocker, capsys):
        """Test the convergence table is printed"""
        convergence = mocker.patch('cli.convergence')
        convergence.return_value = pd.DataFrame({'nx': [10, 20, 40], 'h_L2': [1e-2, 5e-3, 2.5e-3]})
        assert cli.main(['converge', str(config_file), '--meshes', '10,20,40']) == cli.EXIT_OK
        assert convergence.call_args[0][1] == [10, 20, 40]
        assert 'Convergence for lake_at_rest_cone' in capsys.readouterr().out

    def test_no_command(self):
        """Test a bare invocation prints help"""
        assert cli.main([]) == cli.EXIT_CONFIG
