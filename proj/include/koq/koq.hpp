#pragma once

// Umbrella header for the checking kernel.
#include "koq/dimension.hpp"
#include "koq/unit_registry.hpp"
#include "koq/koq_engine.hpp"
#include "koq/quantity.hpp"
#include "koq/diagnostic.hpp"
#include "koq/script.hpp"
#include "koq/checker.hpp"
