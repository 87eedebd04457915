#pragma once

#include "mpjac/core.hpp"
#include "mpjac/jacobi.hpp"
#include "mpjac/matrix_io.hpp"
#include "mpjac/mixed.hpp"
#include "mpjac/norms.hpp"
#include "mpjac/orthogonalize.hpp"
#include "mpjac/testmat.hpp"
