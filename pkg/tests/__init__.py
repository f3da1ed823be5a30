"""Test suite package for photon_dephasing."""
