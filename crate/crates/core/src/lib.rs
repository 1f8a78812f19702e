// SPDX-License-Identifier: Apache-2.0

//! Folksonomy graphs, tag-aware diffusion recommenders, link-prediction
//! evaluation and a gossip simulator for opportunistic networks.

pub mod eval;
pub mod format;
pub mod graph;
pub mod recommend;
pub mod sim;
pub mod trace;
