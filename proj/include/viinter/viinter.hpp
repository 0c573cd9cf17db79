#pragma once

#include "viinter/checkpoint.hpp"
#include "viinter/config.hpp"
#include "viinter/dataset.hpp"
#include "viinter/errors.hpp"
#include "viinter/evalkit.hpp"
#include "viinter/features.hpp"
#include "viinter/image.hpp"
#include "viinter/imageio.hpp"
#include "viinter/latent.hpp"
#include "viinter/metrics.hpp"
#include "viinter/model.hpp"
#include "viinter/optim.hpp"
#include "viinter/rng.hpp"
#include "viinter/scenes.hpp"
#include "viinter/tensor.hpp"
#include "viinter/train.hpp"
