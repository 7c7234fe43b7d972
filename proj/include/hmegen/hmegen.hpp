#pragma once

// Handwritten math expression dataset generation: ink model, InkML I/O,
// distortion, decomposition, rasterization and the generation pipeline.

#include "hmegen/decomposition.hpp"
#include "hmegen/distortion.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/inkml_io.hpp"
#include "hmegen/latex.hpp"
#include "hmegen/layout.hpp"
#include "hmegen/pipeline.hpp"
#include "hmegen/rasterizer.hpp"
#include "hmegen/symbols.hpp"
