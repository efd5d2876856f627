"""Supervised pre-training, rewards, rollouts and policy-gradient updates."""
