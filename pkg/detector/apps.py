"""
EVENT DETECTOR - App Configuration
================================
This file configures the detector app
"""

from django.apps import AppConfig


class DetectorConfig(AppConfig):
    """
    Configuration for the detector app
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'detector'
    verbose_name = 'Event Trigger Detector'
