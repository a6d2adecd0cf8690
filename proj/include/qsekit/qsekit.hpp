#pragma once

#include "channels.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "fermion_operator.hpp"
#include "fock.hpp"
#include "format.hpp"
#include "jordan_wigner.hpp"
#include "linalg.hpp"
#include "molecule.hpp"
#include "pauli_operator.hpp"
#include "qse.hpp"
#include "rdm.hpp"
#include "sampling.hpp"
#include "sector.hpp"
#include "symmetry.hpp"
#include "vcs.hpp"
