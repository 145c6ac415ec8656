#pragma once

#include "netgain/diagstab.hpp"
#include "netgain/errors.hpp"
#include "netgain/linalg.hpp"
#include "netgain/matrix.hpp"
#include "netgain/netsim.hpp"
#include "netgain/network_io.hpp"
#include "netgain/smallgain.hpp"
#include "netgain/tolerances.hpp"
