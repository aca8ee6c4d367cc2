// Umbrella header.
#pragma once

#include "collapse/dynamics.hpp"
#include "collapse/experiments.hpp"
#include "collapse/observer.hpp"
#include "collapse/qcore.hpp"
#include "collapse/report.hpp"
#include "collapse/spin.hpp"
