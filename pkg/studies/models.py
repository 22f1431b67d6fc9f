"""
Study models for uqflow project.

This module stores study runs: the validated scenario a user submitted and
the report (or failure) the runner produced for it.
"""

from django.db import models
from django.contrib.auth.models import User
from django.utils import timezone


class StudyRun(models.Model):
    """
    One execution of a study scenario.
    """
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    SYSTEM_CHOICES = [
        ('cr3bp', 'CR3BP halo'),
        ('aerocapture', 'Aerocapture'),
    ]

    owner = models.ForeignKey(User, on_delete=models.CASCADE, related_name='study_runs')
    name = models.CharField(max_length=200)
    system_kind = models.CharField(max_length=20, choices=SYSTEM_CHOICES)
    scenario = models.JSONField()
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='pending')
    report = models.JSONField(blank=True, null=True)
    error_message = models.TextField(blank=True, default='')
    error_stage = models.CharField(max_length=50, blank=True, default='')
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(blank=True, null=True)

    class Meta:
        db_table = 'study_runs'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.name} ({self.system_kind}) - {self.status}"

    def mark_completed(self, report: dict):
        self.status = 'completed'
        self.report = report
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'report', 'completed_at'])

    def mark_failed(self, message: str, stage: str = ''):
        self.status = 'failed'
        self.error_message = message
        self.error_stage = stage
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'error_message', 'error_stage', 'completed_at'])
