#pragma once

#include "consrec/autodiff.hpp"
#include "consrec/checkpoint.hpp"
#include "consrec/error.hpp"
#include "consrec/evaluation.hpp"
#include "consrec/interactions.hpp"
#include "consrec/model.hpp"
#include "consrec/rng.hpp"
#include "consrec/synthetic.hpp"
#include "consrec/tensor.hpp"
#include "consrec/training.hpp"
#include "consrec/views.hpp"
